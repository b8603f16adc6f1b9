"""Global-optimality and exactness certificates.

Two families of checks:

* Pointwise: a generalized KKT pair (x; u, v) whose shifted Lagrangian
  matrix is cone-copositive certifies that x is globally optimal and the
  copositive relaxation is tight.  "Generalized" means the linear-side
  multipliers v may be negative; only stationarity, feasibility and
  complementarity are required.

* Data-driven, for the two-ball (CDT-shaped) case Q1 = I, q1 = 0: a nonzero
  direction in ker [Q0+; A] that respects B d <= 0 and q0^T d >= 0 forces
  the convex auxiliary problem to have a minimizer on the unit sphere, which
  makes both the Lagrangian and copositive relaxations exact.  The kernel
  condition is decided by small LP feasibility problems; the classical
  dimension condition (dim ker Q0+ >= rank B + 1) is strictly stronger and
  is provided for comparison.

Also here: the two checkable sufficient conditions for the geometric
closedness/convexity hypothesis of the exactness theorem (Z-matrix data and
a positive-definite combination of the quadratic parts).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import matcore
from .copositivity import ConeSpec, is_copositive_cone
from .errors import DimensionMismatch, InfeasibleProblem, NotApplicable, NotCDT
from .lpcore import LinearProgram, lp_feasible
from .model import ETRProblem, StdProblem, evaluate, is_feasible, lagrangian_quadratic, lagrangian_matrix, standardize
from .projections import dykstra_project, feasibility_projectors

_KERNEL_CUTOFF = 1e-9


class CertStatus(Enum):
    GLOBAL_OPTIMAL = "global-optimal"
    EXACT_RELAXATION = "exact-relaxation"
    CONDITION_HOLDS = "condition-holds"
    CONDITION_FAILS = "condition-fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class KKTPair:
    """Candidate point with multipliers; the slack s = b - B x is derived."""

    x: np.ndarray
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(-1))
        u = np.asarray(self.u, dtype=float).reshape(-1)
        if u.shape[0] != 3:
            raise DimensionMismatch("u must have length 3")
        if np.any(u < 0):
            raise ValueError("u must be nonnegative")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float).reshape(-1))


@dataclass(frozen=True)
class Certificate:
    status: CertStatus
    slack_matrix: Optional[np.ndarray] = None
    witness: Optional[np.ndarray] = None
    value: Optional[float] = None
    notes: dict = field(default_factory=dict, compare=False)

    @property
    def holds(self) -> bool:
        return self.status in (CertStatus.GLOBAL_OPTIMAL, CertStatus.EXACT_RELAXATION, CertStatus.CONDITION_HOLDS)


def check_kkt(S: StdProblem, pair: KKTPair, tol: float = 1e-6) -> bool:
    """Feasibility + stationarity + complementarity of a generalized pair."""
    P = S.source
    if pair.x.shape[0] != P.n or pair.v.shape[0] != S.p:
        raise DimensionMismatch("pair dimensions do not match the problem")
    if not is_feasible(P, pair.x, tol=tol):
        return False
    s = S.slack(pair.x)
    y = np.concatenate([s, pair.x])
    q = lagrangian_quadratic(S, pair.u, pair.v)
    grad = 2.0 * (q.H @ y - q.d)
    scale = 1.0 + float(np.linalg.norm(y))
    if float(np.abs(grad).max() if grad.size else 0.0) > tol * scale:
        return False
    if S.p and float(np.abs(pair.v * s).max()) > tol * scale:
        return False
    for i in range(3):
        if abs(pair.u[i] * evaluate(S.fbar[i + 1], y)) > tol * scale:
            return False
    return True


def certify_global(S: StdProblem, pair: KKTPair, tol: float = 1e-8) -> Certificate:
    """Copositivity certificate of global optimality at a KKT pair.

    Builds the slack matrix (homogenized Lagrangian shifted by the objective
    value at x) and tests copositivity on R^(p+1)_+ x R^n.  The condition is
    sufficient only, so a failed test yields Inconclusive, not a refutation.
    """
    if not check_kkt(S, pair):
        return Certificate(CertStatus.INCONCLUSIVE, notes={"reason": "not a generalized KKT pair"})
    mu = evaluate(S.source.f0(), pair.x)
    Sbar = lagrangian_matrix(S, pair.u, mu)
    verdict = is_copositive_cone(Sbar, ConeSpec(S.p + 1, S.n), tol=tol)
    if verdict.copositive:
        return Certificate(CertStatus.GLOBAL_OPTIMAL, slack_matrix=Sbar, value=mu, notes={"verdict": verdict.status.value})
    notes = {"verdict": verdict.status.value}
    if verdict.witness is not None:
        notes["witness_value"] = verdict.witness_value
    return Certificate(CertStatus.INCONCLUSIVE, slack_matrix=Sbar, value=mu, witness=verdict.witness, notes=notes)


def _require_cdt(P: ETRProblem):
    if not (np.allclose(P.Q1, np.eye(P.n), atol=1e-12) and np.allclose(P.q1, 0.0, atol=1e-12)):
        raise NotCDT("requires the two-ball shape Q1 = I, q1 = 0")


def certify_cdt_corollary(P: ETRProblem, pair: KKTPair, tol: float = 1e-8) -> Certificate:
    """Global optimality for the two-ball specialization.

    Identical to certify_global with Q1 = I, q1 = 0 substituted into the
    slack matrix; kept separate so two-ball callers get the shape check.
    """
    _require_cdt(P)
    out = certify_global(standardize(P), pair, tol=tol)
    out.notes["shape"] = "cdt"
    return out


def _kernel_basis(M: np.ndarray, cutoff: float = _KERNEL_CUTOFF) -> np.ndarray:
    """Orthonormal basis of ker M (columns), M arbitrary rectangular."""
    G = matcore.symmetrize(M.T @ M)
    dec = matcore.eig(G)
    thresh = cutoff * max(1.0, dec.lambda_max)
    cols = [dec.vectors[:, i] for i in range(dec.values.shape[0]) if dec.values[i] <= thresh]
    return np.column_stack(cols) if cols else np.zeros((M.shape[1], 0))


def cdt_lp_condition(P: ETRProblem) -> Certificate:
    """LP-checkable exactness condition for two-ball models.

    Decides whether ker [Q0+; A] meets {B d <= 0, q0^T d >= 0} away from the
    origin.  The search runs over a kernel basis N with 2n normalized LPs
    ((N c)_k = +1 and -1 for each coordinate k); this covers every nonzero
    cone direction, unlike the single sum-normalized LP (see
    cdt_lp_condition_paper_normalization), because a cone may contain only
    directions with nonpositive coordinate sums.
    """
    _require_cdt(P)
    lam_min = matcore.eig(P.Q0).lambda_min
    Q0p = P.Q0 - lam_min * np.eye(P.n)
    M = np.vstack([Q0p, P.A]) if P.ell else Q0p
    N = _kernel_basis(M)
    notes = {"normalization": "per-coordinate signed LPs", "kernel_dim": int(N.shape[1])}
    if N.shape[1] == 0:
        return Certificate(CertStatus.CONDITION_FAILS, notes={**notes, "reason": "ker M = {0}"})
    r = N.shape[1]
    BN = P.B @ N if P.p else np.zeros((0, r))
    qN = P.q0 @ N
    for k in range(P.n):
        for sign in (1.0, -1.0):
            out = lp_feasible(
                LinearProgram(
                    c=np.zeros(r),
                    A_eq=N[k, :].reshape(1, -1),
                    b_eq=[sign],
                    A_ub=np.vstack([BN, -qN.reshape(1, -1)]),
                    b_ub=np.zeros(P.p + 1),
                )
            )
            if out.optimal:
                d = N @ out.x
                d = d / float(np.abs(d).max())
                return Certificate(CertStatus.CONDITION_HOLDS, witness=d, notes={**notes, "coordinate": k, "sign": sign})
    return Certificate(CertStatus.CONDITION_FAILS, notes=notes)


def cdt_lp_condition_paper_normalization(P: ETRProblem) -> Certificate:
    """The single sum-normalized LP variant (sum d_i = 1) of the condition.

    Feasibility is sufficient for the kernel condition but not necessary:
    directions with nonpositive coordinate sum are invisible to it.  Results
    are labeled so callers can distinguish the two normalizations.
    """
    _require_cdt(P)
    lam_min = matcore.eig(P.Q0).lambda_min
    Q0p = P.Q0 - lam_min * np.eye(P.n)
    M = np.vstack([Q0p, P.A]) if P.ell else Q0p
    A_eq = np.vstack([M, np.ones((1, P.n))])
    b_eq = np.concatenate([np.zeros(M.shape[0]), [1.0]])
    A_ub = np.vstack([P.B, -P.q0.reshape(1, -1)]) if P.p else -P.q0.reshape(1, -1)
    out = lp_feasible(LinearProgram(c=np.zeros(P.n), A_eq=A_eq, b_eq=b_eq, A_ub=A_ub, b_ub=np.zeros(A_ub.shape[0])))
    notes = {"normalization": "sum d_i = 1 (incomplete)"}
    if out.optimal:
        d = out.x / float(np.abs(out.x).max())
        return Certificate(CertStatus.CONDITION_HOLDS, witness=d, notes=notes)
    return Certificate(CertStatus.CONDITION_FAILS, notes=notes)


def dimension_condition(P: ETRProblem) -> bool:
    """dim ker Q0+ >= rank B + 1 (only meaningful when the second ball is absent)."""
    _require_cdt(P)
    if P.ell and (float(np.abs(P.A).max()) > 0.0 or float(np.abs(P.a).max()) > 0.0):
        raise NotApplicable("dimension condition applies only when A = 0 and a = 0")
    lam_min = matcore.eig(P.Q0).lambda_min
    Q0p = P.Q0 - lam_min * np.eye(P.n)
    ker_dim = _kernel_basis(Q0p).shape[1]
    if P.p == 0:
        rank_b = 0
    else:
        G = matcore.symmetrize(P.B @ P.B.T)
        dec = matcore.eig(G)
        rank_b = int(np.sum(dec.values > _KERNEL_CUTOFF * max(1.0, dec.lambda_max)))
    return bool(ker_dim >= rank_b + 1)


def ap_sphere_minimizer(P: ETRProblem, tol: float = 1e-6, max_iter: int = 20_000) -> Optional[np.ndarray]:
    """Minimizer of the convexified two-ball problem, if it lies on the sphere.

    Solves min x^T Q0+ x + 2 q0^T x over the feasible set by projected
    gradient with Dykstra projections, and returns the minimizer when its
    norm reaches 1 - tol (in which case both relaxations are exact), else
    None.
    """
    _require_cdt(P)
    lam_min = matcore.eig(P.Q0).lambda_min
    Q0p = P.Q0 - lam_min * np.eye(P.n)
    q0 = P.q0
    projs = feasibility_projectors(P)
    if projs is None:
        raise NotApplicable("feasible set has no convex projector decomposition")
    x = dykstra_project(np.zeros(P.n), projs)
    if not is_feasible(P, x, tol=1e-6):
        raise InfeasibleProblem("could not produce a feasible point of the two-ball model")
    lip = 2.0 * max(matcore.eig(Q0p).lambda_max, 1e-12)
    step = 1.0 / lip
    for _ in range(max_iter):
        grad = 2.0 * (Q0p @ x + q0)
        x_new = dykstra_project(x - step * grad, projs)
        if float(np.linalg.norm(x_new - x)) / step <= 1e-9:
            x = x_new
            break
        x = x_new
    if float(np.linalg.norm(x)) >= 1.0 - tol:
        return x
    # the minimizer set is a face: it extends from x along objective-invariant
    # directions (kernel of Q0+ orthogonal to the gradient); push each such
    # direction to the feasibility boundary and accept a sphere touch there
    N = _kernel_basis(Q0p)
    grad = Q0p @ x + q0
    dirs = []
    for i in range(N.shape[1]):
        d = N[:, i]
        if abs(float(grad @ d)) <= 1e-9 * (1.0 + float(np.linalg.norm(grad))):
            dirs.extend([d, -d])
    rng = np.random.default_rng(0)
    flat = [d for d in dirs]
    for _ in range(10 * len(dirs)):
        if N.shape[1] < 2:
            break
        w = rng.standard_normal(len(flat))
        combo = sum(wi * di for wi, di in zip(w, flat))
        nrm = float(np.linalg.norm(combo))
        if nrm > 1e-12:
            dirs.append(combo / nrm)
    best = x
    for d in dirs:
        t_lo, t_hi = 0.0, 1.0
        while is_feasible(P, x + t_hi * d, tol=1e-10) and t_hi < 4.0:
            t_hi *= 2.0
        for _ in range(60):
            mid = 0.5 * (t_lo + t_hi)
            if is_feasible(P, x + mid * d, tol=1e-10):
                t_lo = mid
            else:
                t_hi = mid
        cand = x + t_lo * d
        if float(np.linalg.norm(cand)) > float(np.linalg.norm(best)):
            best = cand
    if float(np.linalg.norm(best)) >= 1.0 - tol:
        return best
    return None


def omega_convexity_sufficient(P: ETRProblem) -> bool:
    """Z-matrix data test: sufficient for convexity of the constraint image.

    Requires Q0, Q1 and A^T A to have nonpositive off-diagonal entries,
    B = -I, and all vectors zero.
    """

    def is_z(M):
        off = M - np.diag(np.diag(M))
        return bool(np.all(off <= 1e-12))

    if not (is_z(P.Q0) and is_z(P.Q1) and is_z(P.A.T @ P.A)):
        return False
    if P.p != P.n or not np.allclose(P.B, -np.eye(P.n), atol=1e-12):
        return False
    for vec in (P.q0, P.q1, P.a, P.b):
        if vec.size and float(np.abs(vec).max()) > 1e-12:
            return False
    return True


def omega_closedness_sufficient(P: ETRProblem, grid_resolution: int = 20) -> Optional[np.ndarray]:
    """Simplex weights tau with tau0 Q0 + tau1 Q1 + tau2 A^T A positive definite.

    Grid search over the simplex plus local polish; None when no combination
    certifies (inconclusive, not a refutation).
    """
    mats = (P.Q0, P.Q1, matcore.symmetrize(P.A.T @ P.A))

    def lam_min(tau):
        tau = np.maximum(np.asarray(tau, dtype=float), 0.0)
        total = tau.sum()
        if total == 0.0:
            return -np.inf, tau
        tau = tau / total
        return matcore.eig(sum(t * M for t, M in zip(tau, mats))).lambda_min, tau

    best_val, best_tau = -np.inf, None
    ticks = np.linspace(0.0, 1.0, grid_resolution + 1)
    for t0 in ticks:
        for t1 in ticks:
            if t0 + t1 > 1.0 + 1e-12:
                continue
            val, tau = lam_min(np.array([t0, t1, 1.0 - t0 - t1]))
            if val > best_val:
                best_val, best_tau = val, tau
    # compass polish around the best grid point
    step = 1.0 / grid_resolution
    tau = best_tau
    while step > 1e-6:
        improved = False
        for i in range(3):
            for sign in (1.0, -1.0):
                cand = tau.copy()
                cand[i] = max(0.0, cand[i] + sign * step)
                val, cand = lam_min(cand)
                if val > best_val + 1e-15:
                    best_val, tau = val, cand
                    improved = True
        if not improved:
            step *= 0.5
    if best_val > 1e-8:
        return tau
    return None
