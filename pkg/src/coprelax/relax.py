"""Relaxation bounds: full Lagrangian, semi-Lagrangian and copositive.

Three quantities, all lower bounds on the optimal value z* of the model:

* theta_full(u, v): closed-form infimum of the Lagrangian over all of
  R^(p+n); z_ld maximizes it over nonnegative multipliers.
* theta_semi(u): infimum of the Lagrangian with the slack signs kept in the
  inner problem, i.e. over R^p_+ x R^n.  Computed two independent ways: an
  exact active-set enumeration, and bisection on the shift mu for which the
  homogenized Lagrangian matrix stays cone-copositive.
* z_cop: the copositive relaxation value, sup of theta_semi over u.  The
  reported number is always a *certified* shift: the final matrix passed
  the exact copositivity test, so the value is a valid bound even when the
  heuristic outer search misses the true supremum.

They satisfy z_ld <= z_cop = sup theta_semi <= z*.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from . import matcore
from .copositivity import ConeSpec, is_copositive_cone
from .errors import DimensionTooLarge
from .lpcore import LinearProgram, lp_feasible, solve_lp
from .model import Multipliers, StdProblem, lagrangian_matrix, lagrangian_quadratic

NEG_INF = float("-inf")
POS_INF = float("inf")

_MINUS_INF_FLOOR = -1e12


class BoundKind(Enum):
    LD = "ld"
    SEMI = "semi"
    COP = "cop"
    HIERARCHY = "hierarchy"


@dataclass(frozen=True)
class Bound:
    kind: BoundKind
    value: float
    multipliers: Optional[Multipliers] = None
    trace: dict = field(default_factory=dict, compare=False)
    level: Optional[int] = None

    @property
    def finite(self) -> bool:
        return np.isfinite(self.value)


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the derivative-free outer searches (all deterministic)."""

    ld_grid: tuple = (0.0, 1.0, 100.0)
    cop_grid: tuple = (0.0, 1.0, 100.0, 10_000.0)
    axis_boosts: tuple = (1_000_000.0,)
    extra_seeds: tuple = ()
    random_restarts: int = 10
    seed: int = 0
    compass_min_step: float = 1e-7
    nm_max_iter: int = 250
    nm_ftol: float = 1e-10
    tol: float = 1e-8
    bisect_gap: float = 1e-7
    theta_method: str = "auto"
    hier_grid: tuple = (0.0, 1.0, 100.0)
    hier_gap: float = 1e-5
    hier_polish_rounds: int = 2

    @property
    def threads(self) -> int:
        try:
            return max(1, int(os.environ.get("RELAX_THREADS", "1")))
        except ValueError:
            return 1


# ---------------------------------------------------------------------------
# derivative-free maximization over the nonnegative orthant


def _eval_many(f: Callable, points, threads: int):
    points = [np.asarray(pt, dtype=float) for pt in points]
    if threads > 1 and len(points) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(f, points))
    else:
        values = [f(pt) for pt in points]
    return list(zip(values, points))


def _compass_max(f, x0, value0, min_step, max_rounds=200):
    x = np.maximum(np.asarray(x0, dtype=float), 0.0)
    best = value0
    steps = np.maximum(0.5, 0.5 * np.abs(x))
    rounds = 0
    while rounds < max_rounds and float(np.max(steps)) > min_step:
        rounds += 1
        improved = False
        for i in range(x.shape[0]):
            for sign in (1.0, -1.0):
                y = x.copy()
                y[i] = max(0.0, y[i] + sign * steps[i])
                if y[i] == x[i]:
                    continue
                val = f(y)
                if val > best + 1e-14 * (1.0 + abs(best)):
                    x, best = y, val
                    improved = True
        if not improved:
            steps *= 0.5
    return x, best


def _neldermead_max(f, x0, max_iter, ftol):
    x0 = np.maximum(np.asarray(x0, dtype=float), 0.0)
    d = x0.shape[0]
    if d == 0:
        return x0, f(x0)

    def g(z):
        val = f(np.maximum(z, 0.0))
        return -1e300 if val == NEG_INF else val

    simplex = [x0]
    for i in range(d):
        pt = x0.copy()
        pt[i] += max(0.25, 0.25 * abs(pt[i]))
        simplex.append(pt)
    vals = [g(p) for p in simplex]
    for _ in range(max_iter):
        order = np.argsort(vals)[::-1]  # descending: best first
        simplex = [simplex[i] for i in order]
        vals = [vals[i] for i in order]
        if vals[0] - vals[-1] <= ftol * (1.0 + abs(vals[0])):
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        refl = centroid + (centroid - worst)
        fr = g(refl)
        if fr > vals[0]:
            expa = centroid + 2.0 * (centroid - worst)
            fe = g(expa)
            if fe > fr:
                simplex[-1], vals[-1] = expa, fe
            else:
                simplex[-1], vals[-1] = refl, fr
        elif fr > vals[-2]:
            simplex[-1], vals[-1] = refl, fr
        else:
            contr = centroid - 0.5 * (centroid - worst)
            fc = g(contr)
            if fc > vals[-1]:
                simplex[-1], vals[-1] = contr, fc
            else:
                for i in range(1, d + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    vals[i] = g(simplex[i])
    i = int(np.argmax(vals))
    best_x = np.maximum(simplex[i], 0.0)
    best_v = f(best_x)
    return best_x, best_v


def _polish_max(f, x0, value0, cfg: SearchConfig):
    x, val = _compass_max(f, x0, value0, cfg.compass_min_step)
    x2, val2 = _neldermead_max(f, x, cfg.nm_max_iter, cfg.nm_ftol)
    if val2 > val:
        x, val = x2, val2
    # one more compass pass with fine steps catches NM stalls at cliffs
    x3, val3 = _compass_max(f, x, val, cfg.compass_min_step * 1e-2, max_rounds=80)
    if val3 > val:
        x, val = x3, val3
    return x, val


# ---------------------------------------------------------------------------
# inner infima


def theta_full(S: StdProblem, u, v, tol: float = 1e-9) -> float:
    """Closed-form inf of L(.; u, v) over all of R^(p+n).

    -inf unless the Hessian is psd and the linear term lies in its range;
    otherwise gamma - d^T H^+ d.
    """
    q = lagrangian_quadratic(S, u, np.asarray(v, dtype=float).reshape(-1))
    if q.dim == 0:
        return float(q.gamma)
    dec = matcore.eig(q.H)
    scale = 1.0 + float(np.abs(q.H).max())
    if dec.lambda_min < -tol * scale:
        return NEG_INF
    Hp = matcore.pinv(q.H)
    z = Hp @ q.d
    if float(np.linalg.norm(q.H @ z - q.d)) > tol * (1.0 + float(np.linalg.norm(q.d))):
        return NEG_INF
    return float(q.gamma - q.d @ z)


def _kernel_ray_escapes(idx_s_count, dec, dz, scale, tol) -> bool:
    """True if the face kernel contains a cone ray with positive linear drift."""
    kernel_cols = [dec.vectors[:, i] for i in range(dec.values.shape[0]) if abs(dec.values[i]) <= tol * scale]
    if not kernel_cols:
        return False
    drift_tol = 1e-9 * (1.0 + float(np.linalg.norm(dz)))
    if len(kernel_cols) == 1:
        for w in (kernel_cols[0], -kernel_cols[0]):
            if np.all(w[:idx_s_count] >= -1e-12) and float(dz @ w) > drift_tol:
                return True
        return False
    N = np.column_stack(kernel_cols)
    obj = N.T @ dz
    if idx_s_count == 0:
        return bool(np.linalg.norm(obj) > drift_tol)
    out = solve_lp(
        LinearProgram(
            c=-obj,
            A_ub=-N[:idx_s_count, :],
            b_ub=np.zeros(idx_s_count),
            lb=-np.ones(N.shape[1]),
            ub=np.ones(N.shape[1]),
        )
    )
    return bool(out.optimal and out.value is not None and -out.value > drift_tol)


def _face_candidate(Hz, dz, n_s, tol):
    """Critical value of the reduced quadratic on a face, or None.

    Returns (value, z0) when the face Hessian is psd, the linear system is
    consistent, and the critical set contains a point with nonnegative slack
    coordinates; all critical points share one value.
    """
    dim = Hz.shape[0]
    if dim == 0:
        return 0.0, np.zeros(0)
    dec = matcore.eig(Hz)
    scale = 1.0 + float(np.abs(Hz).max())
    if dec.lambda_min < -tol * scale:
        return None
    Hp = matcore.pinv(Hz)
    z0 = Hp @ dz
    if float(np.linalg.norm(Hz @ z0 - dz)) > tol * (1.0 + float(np.linalg.norm(dz))):
        return None
    value = float(-dz @ z0)
    if n_s == 0 or np.all(z0[:n_s] >= -1e-9):
        return value, z0
    kernel_cols = [dec.vectors[:, i] for i in range(dim) if abs(dec.values[i]) <= tol * scale]
    if not kernel_cols:
        return None
    N = np.column_stack(kernel_cols)
    out = lp_feasible(
        LinearProgram(
            c=np.zeros(N.shape[1]),
            A_ub=-N[:n_s, :],
            b_ub=z0[:n_s],
        )
    )
    if not out.optimal:
        return None
    return value, z0 + N @ out.x


def theta_semi(S: StdProblem, u, method: str = "auto", tol: float = 1e-8, bisect_gap: float = 1e-7) -> float:
    """Inf of L(.; u, 0) over the slack cone R^p_+ x R^n.

    "active-set" enumerates the 2^p slack faces and is exact (capped at
    p <= 12); "bisection" climbs the largest shift mu keeping the
    homogenized matrix cone-copositive.  Both agree up to tolerances.
    """
    if method == "auto":
        method = "active-set" if S.p <= 12 else "bisection"
    if method == "active-set":
        return _theta_semi_active_set(S, u, tol)
    if method == "bisection":
        return _theta_semi_bisection(S, u, tol, bisect_gap)
    raise ValueError(f"unknown method {method!r}")


def _theta_semi_active_set(S: StdProblem, u, tol: float) -> float:
    if S.p > 12:
        raise DimensionTooLarge("active-set enumeration capped at p <= 12")
    q = lagrangian_quadratic(S, u)
    p, n = S.p, S.n
    if p + n == 0:
        return float(q.gamma)
    if not is_copositive_cone(q.H, ConeSpec(p, n), tol=tol).copositive:
        return NEG_INF

    x_idx = list(range(p, p + n))
    candidates = []
    for mask in range(1 << p):
        free_s = [j for j in range(p) if mask >> j & 1]
        idx = free_s + x_idx
        Hz = q.H[np.ix_(idx, idx)]
        dz = q.d[idx]
        scale = 1.0 + (float(np.abs(Hz).max()) if Hz.size else 0.0)
        dec = matcore.eig(Hz) if Hz.size else None
        if dec is not None and _kernel_ray_escapes(len(free_s), dec, dz, scale, tol):
            return NEG_INF
        cand = _face_candidate(Hz, dz, len(free_s), tol)
        if cand is not None:
            candidates.append(cand[0])
    if not candidates:
        # the quadratic attains no minimum on any face, hence is unbounded
        return NEG_INF
    return float(q.gamma + min(candidates))


def _theta_semi_bisection(S: StdProblem, u, tol: float, gap: float) -> float:
    q = lagrangian_quadratic(S, u)
    cone = ConeSpec(S.p + 1, S.n)
    if S.p + S.n == 0:
        return float(q.gamma)
    if not is_copositive_cone(q.H, ConeSpec(S.p, S.n), tol=tol).copositive:
        return NEG_INF

    def copositive_at(mu: float) -> bool:
        return is_copositive_cone(lagrangian_matrix(S, u, mu), cone, tol=tol).copositive

    hi = float(q.gamma) + 1.0  # L(0) bounds theta from above
    lo = min(-1.0, hi - 2.0)
    while not copositive_at(lo):
        lo = hi - 2.0 * (hi - lo)
        if lo < _MINUS_INF_FLOOR:
            return NEG_INF
    while hi - lo > gap * max(1.0, abs(lo)):
        mid = 0.5 * (lo + hi)
        if copositive_at(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)


# ---------------------------------------------------------------------------
# outer searches


def _u_seed_list(grid, cfg: SearchConfig, rng) -> list:
    seeds = [np.array([a, b, c]) for a in grid for b in grid for c in grid]
    top = max(grid) if grid else 1.0
    for boost in cfg.axis_boosts:
        for i in range(3):
            e = np.zeros(3)
            e[i] = boost
            seeds.append(e)
        seeds.append(np.full(3, boost))
    for extra in cfg.extra_seeds:
        seeds.append(np.asarray(extra, dtype=float).reshape(3))
    for _ in range(cfg.random_restarts):
        mask = rng.uniform(size=3) < 0.7
        seeds.append(np.where(mask, 10.0 ** rng.uniform(-2, np.log10(max(top, 10.0)) + 1, size=3), 0.0))
    return seeds


def z_ld(S: StdProblem, cfg: SearchConfig = SearchConfig()) -> Bound:
    """Lagrangian dual value by multi-start maximization of theta_full.

    -inf is reported only after every structured grid probe and random
    restart came back -inf (heuristic, documented); any finite result is an
    exact theta_full evaluation, hence a valid lower bound on z*.
    """
    rng = np.random.default_rng(cfg.seed)
    p = S.p

    def unpack(w):
        return w[:3], w[3:]

    def f(w):
        u, v = unpack(np.maximum(w, 0.0))
        return theta_full(S, u, v, tol=cfg.tol * 0.1)

    probes = []
    for u in [np.array([a, b, c]) for a in cfg.ld_grid for b in cfg.ld_grid for c in cfg.ld_grid]:
        probes.append(np.concatenate([u, np.zeros(p)]))
    for boost in cfg.axis_boosts:
        for i in range(3):
            e = np.zeros(3 + p)
            e[i] = boost
            probes.append(e)
    for _ in range(max(10, cfg.random_restarts)):
        u = 10.0 ** rng.uniform(-2, 4, size=3) * (rng.uniform(size=3) < 0.7)
        v = 10.0 ** rng.uniform(-2, 2, size=p) * (rng.uniform(size=p) < 0.5)
        probes.append(np.concatenate([u, v]))

    evaluated = _eval_many(f, probes, cfg.threads)
    finite = [(val, pt) for val, pt in evaluated if val > NEG_INF]
    trace = {"probes": len(probes), "finite_probes": len(finite)}
    if not finite:
        return Bound(BoundKind.LD, NEG_INF, trace=trace)
    finite.sort(key=lambda t: (-t[0], float(np.linalg.norm(t[1]))))
    best_val, best_pt = finite[0]
    x, val = _polish_max(f, best_pt, best_val, cfg)
    u, v = unpack(x)
    trace["polished_from"] = best_val
    return Bound(BoundKind.LD, float(val), Multipliers(u, v), trace=trace)


def _certify_mu(S: StdProblem, u, theta: float, tol: float):
    """Largest verified shift at u: tries theta then tiny backoffs."""
    cone = ConeSpec(S.p + 1, S.n)
    scale = 1.0 + abs(theta)
    for backoff in (0.0, 1e-12, 1e-10, 1e-9, 3e-9, 1e-8, 1e-7):
        mu = theta - backoff * scale
        verdict = is_copositive_cone(lagrangian_matrix(S, u, mu), cone, tol=tol)
        if verdict.copositive:
            return mu, verdict, backoff
    return None, None, None


def z_cop(S: StdProblem, cfg: SearchConfig = SearchConfig()) -> Bound:
    """Copositive relaxation value: sup_u theta_semi(u), certified.

    The outer search is heuristic (theta_semi is concave but the search is
    derivative-free); the reported value is the best *certified* shift mu,
    which is a valid lower bound on z* regardless of whether the supremum
    was found.
    """
    rng = np.random.default_rng(cfg.seed + 1)
    seeds = _u_seed_list(cfg.cop_grid, cfg, rng)

    def f(u):
        return theta_semi(S, np.maximum(u, 0.0), method=cfg.theta_method, tol=cfg.tol, bisect_gap=cfg.bisect_gap)

    evaluated = _eval_many(f, seeds, cfg.threads)
    finite = [(val, pt) for val, pt in evaluated if val > NEG_INF]
    trace = {"seeds": len(seeds), "finite_seeds": len(finite)}
    if not finite:
        return Bound(BoundKind.COP, NEG_INF, trace=trace)
    finite.sort(key=lambda t: (-t[0], float(np.linalg.norm(t[1]))))
    best_val, best_u = finite[0]
    u, theta = _polish_max(f, best_u, best_val, cfg)
    if theta > 1e12:
        return Bound(BoundKind.COP, POS_INF, trace={**trace, "note": "diverging shift, likely infeasible model"})
    mu, verdict, backoff = _certify_mu(S, u, theta, cfg.tol)
    if mu is None:
        # fall back on the certified side of a fresh bisection
        mu = _theta_semi_bisection(S, u, cfg.tol, cfg.bisect_gap)
        if mu == NEG_INF:
            return Bound(BoundKind.COP, NEG_INF, trace=trace)
        verdict = is_copositive_cone(lagrangian_matrix(S, u, mu), ConeSpec(S.p + 1, S.n), tol=cfg.tol)
        backoff = "bisection"
    trace.update({"theta": theta, "certified_backoff": backoff, "verdict": verdict.status.value})
    return Bound(BoundKind.COP, float(mu), Multipliers(np.maximum(u, 0.0), np.zeros(S.p)), trace=trace)


def chain_check(S: StdProblem, zstar: float, cfg: SearchConfig = SearchConfig(), tol: float = 1e-6) -> bool:
    """Verify z_ld <= z_cop + tol and z_cop <= zstar + tol on this instance.

    z_cop is re-seeded with the Lagrangian maximizer so the computed chain
    cannot invert due to search asymmetry (theta_semi(u) >= theta_full(u, v)
    pointwise on nonnegative multipliers).
    """
    ld = z_ld(S, cfg)
    extra = cfg.extra_seeds
    if ld.multipliers is not None:
        extra = tuple(extra) + (tuple(ld.multipliers.u),)
    cop = z_cop(S, SearchConfig(**{**cfg.__dict__, "extra_seeds": extra}))
    ok_first = ld.value <= cop.value + tol
    ok_second = cop.value <= zstar + tol
    return bool(ok_first and ok_second)
