"""Exact copositivity tests on cones of the form R^k_+ x R^m.

A symmetric M is cone-copositive when v^T M v >= 0 for every v with its
first k coordinates nonnegative and the rest free.  The free block is
eliminated by a Schur-complement reduction: M is copositive on the mixed
cone iff the free block H is psd with ker H contained in ker S^T, and the
Schur complement R - S^T H^+ S is copositive on the orthant alone.

Orthant copositivity is decided exactly by the classical principal
submatrix criterion: M fails iff some principal submatrix has an
eigenvector with strictly positive entries whose eigenvalue is negative.
That costs 2^k eigendecompositions, which is fine here because the orthant
blocks coming out of the relaxation machinery are small.

Every negative answer carries an explicit witness vector in the cone whose
quadratic value is negative, so callers can re-verify verdicts offline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import matcore
from .errors import DimensionMismatch, DimensionTooLarge, NotStrictlyCopositive, NumericalFailure

MAX_CLASSICAL_ORDER = 16
DEFAULT_TOL = 1e-8
_WITNESS_FLOOR = -1e-12


class CopStatus(Enum):
    COPOSITIVE = "copositive"
    NOT_COPOSITIVE = "not-copositive"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class ConeSpec:
    """Cone R^k_+ x R^m, orthant coordinates leading."""

    k: int
    m: int

    def __post_init__(self):
        if self.k < 0 or self.m < 0 or self.k + self.m < 1:
            raise DimensionMismatch("cone needs k, m >= 0 and k + m >= 1")

    @property
    def dim(self) -> int:
        return self.k + self.m

    def contains(self, v, tol: float = 1e-9) -> bool:
        v = np.asarray(v, dtype=float).reshape(-1)
        return v.shape[0] == self.dim and bool(np.all(v[: self.k] >= -tol))


@dataclass(frozen=True)
class CopositivityVerdict:
    status: CopStatus
    witness: Optional[np.ndarray] = None
    witness_value: Optional[float] = None
    margin: Optional[float] = None
    strict: Optional[bool] = None
    note: str = field(default="", compare=False)

    @property
    def copositive(self) -> bool:
        return self.status is CopStatus.COPOSITIVE


def _finish_negative(M: np.ndarray, witness: np.ndarray, note: str) -> CopositivityVerdict:
    value = float(witness @ M @ witness)
    if value >= _WITNESS_FLOOR:
        # tolerance edge: refuse to certify a non-negative "witness"
        return CopositivityVerdict(CopStatus.UNKNOWN, note=f"{note}; witness value {value:.3e} not conclusive")
    return CopositivityVerdict(CopStatus.NOT_COPOSITIVE, witness=witness, witness_value=value, note=note)


def _positive_eigvec(w: np.ndarray) -> Optional[np.ndarray]:
    """Sign-normalize; return the vector when all entries are strictly positive."""
    scale = float(np.abs(w).max())
    if scale == 0.0:
        return None
    if np.sum(w) < 0:
        w = -w
    if np.all(w > 1e-12 * scale):
        return w
    return None


def classical_slice_min(M) -> float:
    """Exact min of v^T M v over {v >= 0, ||v|| = 1}.

    The minimizer restricted to its support is an eigenvector of that
    principal submatrix with strictly positive entries, so scanning all
    submatrix eigenpairs with positive eigenvectors yields the minimum.
    """
    M = matcore.symmetrize(M)
    n = M.shape[0]
    if n == 0:
        raise DimensionMismatch("empty matrix has no unit slice")
    if n > MAX_CLASSICAL_ORDER:
        raise DimensionTooLarge(f"order {n} exceeds classical cap {MAX_CLASSICAL_ORDER}")
    best = np.inf
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            sub = M[np.ix_(subset, subset)]
            dec = matcore.eig(sub)
            for lam, col in zip(dec.values, dec.vectors.T):
                if lam >= best:
                    continue
                if _positive_eigvec(col) is not None:
                    best = float(lam)
    return float(best)


def is_copositive_classical(M, tol: float = DEFAULT_TOL) -> CopositivityVerdict:
    """Orthant copositivity by the principal-submatrix eigenvector criterion."""
    M = matcore.symmetrize(M)
    n = M.shape[0]
    if n == 0:
        return CopositivityVerdict(CopStatus.COPOSITIVE, note="empty orthant block")
    if n > MAX_CLASSICAL_ORDER:
        raise DimensionTooLarge(f"order {n} exceeds classical cap {MAX_CLASSICAL_ORDER}")
    thresh = tol * (1.0 + float(np.abs(M).max()))
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            sub = M[np.ix_(subset, subset)]
            dec = matcore.eig(sub)
            for lam, col in zip(dec.values, dec.vectors.T):
                if lam >= -thresh:
                    break  # ascending eigenvalues
                w = _positive_eigvec(col)
                if w is None:
                    continue
                witness = np.zeros(n)
                witness[list(subset)] = w / np.linalg.norm(w)
                return _finish_negative(M, witness, f"submatrix {subset} eigenvalue {lam:.6g}")
    return CopositivityVerdict(CopStatus.COPOSITIVE)


def is_copositive_cone(M, cone: ConeSpec, tol: float = DEFAULT_TOL) -> CopositivityVerdict:
    """Copositivity on R^k_+ x R^m via the Schur-complement reduction.

    Checks, in order: the free block H is psd; ker H lies inside ker S^T;
    the Schur complement R - S^T H^+ S is orthant-copositive.  Failure of
    any step produces a cone witness from that step.
    """
    M = matcore.symmetrize(M)
    if M.shape[0] != cone.dim:
        raise DimensionMismatch(f"matrix order {M.shape[0]} does not match cone dim {cone.dim}")
    k, m = cone.k, cone.m
    if m == 0:
        return is_copositive_classical(M, tol=tol)
    if k == 0:
        dec = matcore.eig(M)
        scale = 1.0 + float(np.abs(M).max())
        if dec.lambda_min < -tol * scale:
            return _finish_negative(M, dec.vectors[:, 0], f"free-space eigenvalue {dec.lambda_min:.6g}")
        return CopositivityVerdict(CopStatus.COPOSITIVE, note="psd on free space")

    R = M[:k, :k]
    S = M[k:, :k]
    H = M[k:, k:]
    scale = 1.0 + float(np.abs(M).max())

    dec = matcore.eig(H)
    if dec.lambda_min < -tol * scale:
        witness = np.concatenate([np.zeros(k), dec.vectors[:, 0]])
        return _finish_negative(M, witness, f"free block eigenvalue {dec.lambda_min:.6g}")

    Hp = matcore.pinv(H)
    resid = S - H @ (Hp @ S)
    resid_norm = float(np.linalg.norm(resid))
    if resid_norm > tol * (1.0 + float(np.linalg.norm(S))):
        i = int(np.argmax(np.linalg.norm(resid, axis=0)))
        z = resid[:, i]
        z = -z / np.linalg.norm(z)  # kernel direction with (S^T z)_i < 0
        drift = float(z @ S[:, i])
        t = (abs(R[i, i]) + 1.0) / (2.0 * abs(drift))
        witness = np.concatenate([np.eye(k)[i], t * z])
        witness /= np.linalg.norm(witness)
        return _finish_negative(M, witness, f"kernel of free block leaks into column {i}")

    C = R - S.T @ (Hp @ S)
    inner = is_copositive_classical(C, tol=tol)
    if inner.status is CopStatus.NOT_COPOSITIVE:
        w = inner.witness
        x = -Hp @ (S @ w)
        witness = np.concatenate([w, x])
        witness /= np.linalg.norm(witness)
        return _finish_negative(M, witness, f"Schur complement not orthant-copositive ({inner.note})")
    if inner.status is CopStatus.UNKNOWN:
        return CopositivityVerdict(CopStatus.UNKNOWN, note=f"Schur complement borderline: {inner.note}")
    return CopositivityVerdict(CopStatus.COPOSITIVE)


def is_strictly_copositive(M, cone: ConeSpec, tol: float = DEFAULT_TOL) -> CopositivityVerdict:
    """Copositivity plus the margin min{v^T M v : v in cone, ||v|| = 1}.

    The margin is exact for pure orthants and pure free space; for mixed
    cones it is located by bisection on copositivity of M - eps I.
    """
    M = matcore.symmetrize(M)
    base = is_copositive_cone(M, cone, tol=tol)
    if base.status is not CopStatus.COPOSITIVE:
        return base
    k, m = cone.k, cone.m
    if m == 0:
        margin = classical_slice_min(M)
    elif k == 0:
        margin = matcore.eig(M).lambda_min
    else:
        hi = float(np.min(np.diag(M)))
        hi = min(hi, matcore.eig(M[k:, k:]).lambda_min)
        hi = max(hi, 0.0)
        lo = 0.0
        if hi > 0.0:
            gap_tol = 1e-9 * (1.0 + abs(hi))
            while hi - lo > gap_tol:
                mid = 0.5 * (lo + hi)
                if is_copositive_cone(M - mid * np.eye(cone.dim), cone, tol=tol).copositive:
                    lo = mid
                else:
                    hi = mid
        margin = lo
    margin = float(max(margin, 0.0))
    strict = margin > max(tol, 1e-10) * (1.0 + float(np.abs(M).max()))
    return CopositivityVerdict(CopStatus.COPOSITIVE, margin=margin, strict=strict)


def strict_margin_sigma(M, tol: float = DEFAULT_TOL, eps_floor: float = 1e-6) -> float:
    """Penalty weight sigma with x^T M x + sigma ||x - s||^2 > 0 off the origin.

    Requires M strictly orthant-copositive.  sigma comes from the classical
    two-case argument: rho is the exact orthant slice minimum, eps is found
    by halving until the conservative bound
        rho (1 - eps^2) - 2 |M| eps - |M| eps^2 >= rho / 2
    holds, and sigma = max(1, -2 lambda_min / eps^2).  The assembled block
    matrix [[0, 0], [0, [[sigma I, -sigma I], [-sigma I, M + sigma I]]]] is
    re-verified to be copositive on R^(n+1)_+ x R^n before returning.
    """
    M = matcore.symmetrize(M)
    n = M.shape[0]
    if n == 0:
        raise DimensionMismatch("empty matrix")
    rho = classical_slice_min(M)
    scale = 1.0 + float(np.abs(M).max())
    if rho <= tol * scale:
        raise NotStrictlyCopositive(f"orthant slice minimum {rho:.3e} is not strictly positive")

    dec = matcore.eig(M)
    if dec.lambda_min >= -tol * scale:
        sigma = 1.0
    else:
        norm2 = float(np.abs(dec.values).max())
        eps = 1.0
        while rho * (1.0 - eps * eps) - 2.0 * norm2 * eps - norm2 * eps * eps < 0.5 * rho:
            eps *= 0.5
            if eps < eps_floor:
                raise NotStrictlyCopositive(
                    f"halving search hit the {eps_floor:g} floor without certifying a margin radius"
                )
        sigma = max(1.0, -2.0 * dec.lambda_min / (eps * eps))

    for _ in range(8):
        block = np.zeros((2 * n + 1, 2 * n + 1))
        block[1 : n + 1, 1 : n + 1] = sigma * np.eye(n)
        block[1 : n + 1, n + 1 :] = -sigma * np.eye(n)
        block[n + 1 :, 1 : n + 1] = -sigma * np.eye(n)
        block[n + 1 :, n + 1 :] = M + sigma * np.eye(n)
        if is_copositive_cone(block, ConeSpec(n + 1, n), tol=tol).copositive:
            return float(sigma)
        sigma *= 2.0
    raise NumericalFailure("could not re-verify the penalty certificate")
