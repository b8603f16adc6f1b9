"""Dense symmetric-matrix kernel.

Everything downstream (copositivity tests, relaxation bounds, certificates)
reduces to a handful of primitives on small dense symmetric matrices:
eigendecomposition, Moore-Penrose pseudoinverse, psd tests, direct sums and
the homogenizing matrix of a quadratic function.  Orders stay below ~50, so
a cyclic Jacobi sweep is plenty and keeps the whole stack dependency-free
and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NumericalFailure

SYMMETRY_TOL = 1e-8
PINV_TOL = 1e-9

_JACOBI_MAX_SWEEPS = 100
_JACOBI_OFF_TOL = 1e-13


def symmetrize(M, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate and return the symmetric part (M + M^T)/2 of a square matrix.

    Asymmetry beyond `tol` (relative to the matrix scale) is an input error,
    not something to silently average away.
    """
    A = np.asarray(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatch("matrix entries must be finite")
    scale = max(1.0, float(np.abs(A).max()) if A.size else 0.0)
    if A.size and float(np.abs(A - A.T).max()) > tol * scale:
        raise DimensionMismatch("matrix is not symmetric within tolerance")
    return 0.5 * (A + A.T)


@dataclass(frozen=True)
class EigDecomp:
    """Eigendecomposition M = V diag(values) V^T, values ascending."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def lambda_min(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0

    @property
    def lambda_max(self) -> float:
        return float(self.values[-1]) if self.values.size else 0.0


def eig(M) -> EigDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Always converges for symmetric input; the sweep cap only guards against
    non-finite data sneaking through and raises NumericalFailure.
    """
    A = symmetrize(M)
    n = A.shape[0]
    if n == 0:
        return EigDecomp(np.zeros(0), np.zeros((0, 0)))
    if n == 1:
        return EigDecomp(A[0].copy(), np.ones((1, 1)))

    A = A.copy()
    V = np.eye(n)
    scale = 1.0 + float(np.linalg.norm(A))
    for _ in range(_JACOBI_MAX_SWEEPS):
        # sum the off-diagonal mass directly: subtracting diagonal energy from
        # the total cancels catastrophically once off is below sqrt(eps)*|A|
        strict_off = A - np.diag(np.diag(A))
        off = float(np.linalg.norm(strict_off))
        if off <= _JACOBI_OFF_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-18 * scale:
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                # Rutishauser's stable rotation choice.
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 1.0 / (2.0 * theta)
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = 0.0
                A[q, p] = 0.0
                v_p = V[:, p].copy()
                v_q = V[:, q].copy()
                V[:, p] = c * v_p - s * v_q
                V[:, q] = s * v_p + c * v_q
    else:
        raise NumericalFailure("Jacobi iteration did not converge")

    values = np.diag(A).copy()
    order = np.argsort(values, kind="stable")
    return EigDecomp(values[order], V[:, order])


def pinv(M, tol: float = PINV_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the spectral decomposition.

    Eigenvalues with |lambda| <= tol * max(1, |lambda|_max) are treated as
    zero rank.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dec = eig(M)
    if dec.values.size == 0:
        return np.zeros((0, 0))
    cutoff = tol * max(1.0, float(np.abs(dec.values).max()))
    safe = np.where(dec.values == 0.0, 1.0, dec.values)
    inv = np.where(np.abs(dec.values) <= cutoff, 0.0, 1.0 / safe)
    return symmetrize(dec.vectors @ np.diag(inv) @ dec.vectors.T)


def is_psd(M, tol: float = 1e-9) -> bool:
    """True iff the smallest eigenvalue is >= -tol."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    dec = eig(M)
    if dec.values.size == 0:
        return True
    return dec.lambda_min >= -tol


def direct_sum(A, B) -> np.ndarray:
    """Block-diagonal direct sum of two symmetric matrices."""
    A = symmetrize(A)
    B = symmetrize(B)
    na, nb = A.shape[0], B.shape[0]
    out = np.zeros((na + nb, na + nb))
    out[:na, :na] = A
    out[na:, na:] = B
    return out


def jay(dim: int) -> np.ndarray:
    """dim x dim matrix with a single 1 in the (0, 0) entry."""
    if dim < 1:
        raise DimensionMismatch("jay requires dim >= 1")
    J = np.zeros((dim, dim))
    J[0, 0] = 1.0
    return J


def shor_matrix(q) -> np.ndarray:
    """Homogenized (n+1) x (n+1) matrix [[gamma, -d^T], [-d, H]] of a quadratic.

    The quadratic q(x) = x^T H x - 2 d^T x + gamma is globally nonnegative
    exactly when this matrix is psd.
    """
    H = symmetrize(q.H)
    d = np.asarray(q.d, dtype=float).reshape(-1)
    if d.shape[0] != H.shape[0]:
        raise DimensionMismatch("linear term dimension does not match H")
    n = H.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[0, 0] = q.gamma
    M[0, 1:] = -d
    M[1:, 0] = -d
    M[1:, 1:] = H
    return M
