"""Euclidean projections onto the model's constraint sets.

The feasible region intersects quadratic sublevel sets (the two balls) with
halfspaces (the rows of B).  Convex pieces project cheaply: a psd sublevel
set {x : x^T Q x - 2 d^T x + gamma <= 0} via a one-dimensional dual root
find, halfspaces in closed form.  The intersection is handled by Dykstra's
alternating scheme, which converges to the true nearest point for convex
pieces (plain alternation does not).

Nonconvex first constraints (indefinite Q1) have no projection; callers get
None from feasibility_projectors and fall back to rejection-based local
search.
"""

from __future__ import annotations

import numpy as np

from . import matcore
from .errors import InfeasibleProblem


def project_ball(z, radius: float = 1.0):
    z = np.asarray(z, dtype=float)
    nrm = float(np.linalg.norm(z))
    if nrm <= radius:
        return z.copy()
    return z * (radius / nrm)


def project_halfspace(z, row, rhs: float):
    row = np.asarray(row, dtype=float)
    z = np.asarray(z, dtype=float)
    nrm2 = float(row @ row)
    viol = float(row @ z) - rhs
    if viol <= 0.0:
        return z.copy()
    if nrm2 == 0.0:
        raise InfeasibleProblem("vacuous row 0^T x <= b with b < 0")
    return z - (viol / nrm2) * row


class QuadSublevel:
    """Projection onto {x : x^T Q x - 2 d^T x + gamma <= 0} for psd Q."""

    def __init__(self, Q, d, gamma: float):
        self.Q = matcore.symmetrize(Q)
        self.d = np.asarray(d, dtype=float).reshape(-1)
        self.gamma = float(gamma)
        self.dec = matcore.eig(self.Q)
        if self.dec.values.size and self.dec.lambda_min < -1e-9 * (1.0 + abs(self.dec.lambda_max)):
            raise ValueError("QuadSublevel requires a psd quadratic part")

    def residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(x @ self.Q @ x - 2.0 * self.d @ x + self.gamma)

    def project(self, z):
        z = np.asarray(z, dtype=float)
        if self.residual(z) <= 0.0:
            return z.copy()
        V, lam = self.dec.vectors, np.maximum(self.dec.values, 0.0)
        zt = V.T @ z
        bt = V.T @ self.d

        def point(nu):
            return V @ ((zt + nu * bt) / (1.0 + nu * lam))

        lo, hi = 0.0, 1.0
        while self.residual(point(hi)) > 0.0:
            hi *= 2.0
            if hi > 1e16:
                raise InfeasibleProblem("quadratic sublevel set appears empty")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.residual(point(mid)) > 0.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-14 * (1.0 + hi):
                break
        return point(hi)


def _sublevel_projector(Q, d, gamma, n):
    """Projector for one quadratic constraint, or None when vacuous."""
    q_scale = float(np.abs(Q).max()) if Q.size else 0.0
    d_scale = float(np.abs(d).max()) if d.size else 0.0
    if q_scale == 0.0 and d_scale == 0.0:
        if gamma > 1e-12:
            raise InfeasibleProblem("constant constraint gamma <= 0 violated")
        return None
    if q_scale == 0.0:
        row = -2.0 * d
        return lambda z, row=row, rhs=-gamma: project_halfspace(z, row, rhs)
    sub = QuadSublevel(Q, d, gamma)
    return sub.project


def feasibility_projectors(P):
    """Projection list for the model's feasible set; None if nonconvex."""
    projs = []
    if matcore.eig(P.Q1).lambda_min < -1e-9 * (1.0 + float(np.abs(P.Q1).max())):
        return None
    for f in (P.f1(), P.f2()):
        try:
            proj = _sublevel_projector(f.H, f.d, f.gamma, P.n)
        except ValueError:
            return None
        if proj is not None:
            projs.append(proj)
    for i in range(P.p):
        row = P.B[i].copy()
        rhs = float(P.b[i])
        projs.append(lambda z, row=row, rhs=rhs: project_halfspace(z, row, rhs))
    return projs


def dykstra_project(z, projectors, max_cycles: int = 2000, tol: float = 1e-12):
    """Nearest point of an intersection of convex sets (Dykstra's scheme)."""
    x = np.asarray(z, dtype=float).copy()
    if not projectors:
        return x
    increments = [np.zeros_like(x) for _ in projectors]
    for _ in range(max_cycles):
        x_prev = x.copy()
        for i, proj in enumerate(projectors):
            y = proj(x + increments[i])
            increments[i] = x + increments[i] - y
            x = y
        if float(np.linalg.norm(x - x_prev)) <= tol * (1.0 + float(np.linalg.norm(x))):
            break
    return x
