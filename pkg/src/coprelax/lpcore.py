"""Self-contained dense linear-programming solver.

Two-phase primal simplex on a dense tableau with Bland's anti-cycling rule.
The LPs solved here (kernel-direction feasibility checks, Handelman
coefficient matching) are small, so determinism and exact vertex answers
matter far more than speed.  Free variables are handled by sign splitting,
finite bounds by shifting; every inequality row gets a slack and every row
a phase-one artificial.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, NumericalFailure

_PIVOT_TOL = 1e-10
_COST_TOL = 1e-9
_FEAS_TOL = 1e-8
_MAX_PIVOTS = 50_000


class LPStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """min c^T x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lb <= x <= ub.

    lb/ub may be None (all free / all unbounded above) or arrays with
    -inf/+inf entries.  Variables are free by default.
    """

    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ub: Optional[np.ndarray] = None
    b_ub: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        n = c.shape[0]
        object.__setattr__(self, "c", c)

        def mat(M, b, name):
            if M is None or np.asarray(M).size == 0:
                return np.zeros((0, n)), np.zeros(0)
            M = np.asarray(M, dtype=float).reshape(-1, n)
            b = np.asarray(b, dtype=float).reshape(-1)
            if b.shape[0] != M.shape[0]:
                raise DimensionMismatch(f"{name}: rhs does not match row count")
            return M, b

        A_eq, b_eq = mat(self.A_eq, self.b_eq, "A_eq")
        A_ub, b_ub = mat(self.A_ub, self.b_ub, "A_ub")
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "b_eq", b_eq)
        object.__setattr__(self, "A_ub", A_ub)
        object.__setattr__(self, "b_ub", b_ub)
        lb = np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).reshape(-1)
        ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).reshape(-1)
        if lb.shape[0] != n or ub.shape[0] != n:
            raise DimensionMismatch("bounds must match variable count")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)
        for arr in (c, A_eq, b_eq, A_ub, b_ub):
            if arr.size and not np.all(np.isfinite(arr)):
                raise DimensionMismatch("LP data must be finite")

    @property
    def nvars(self) -> int:
        return self.c.shape[0]


@dataclass(frozen=True)
class LPOutcome:
    status: LPStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    iterations: int = 0
    note: str = field(default="", compare=False)

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


class _Tableau:
    """Dense simplex tableau: rows of A|b plus a reduced-cost row."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, -1] = b
        self.basis = [-1] * m
        self.pivots = 0

    def set_costs(self, c: np.ndarray):
        m = self.T.shape[0] - 1
        self.T[-1, :] = 0.0
        self.T[-1, : c.shape[0]] = c
        for r in range(m):
            j = self.basis[r]
            cj = self.T[-1, j]
            if abs(cj) > 0.0:
                self.T[-1, :] -= cj * self.T[r, :]

    def pivot(self, row: int, col: int):
        self.T[row, :] /= self.T[row, col]
        for r in range(self.T.shape[0]):
            if r != row and abs(self.T[r, col]) > 0.0:
                self.T[r, :] -= self.T[r, col] * self.T[row, :]
        self.basis[row] = col
        self.pivots += 1

    def run(self, ncols: int) -> LPStatus:
        """Bland's rule simplex over the first ncols columns."""
        m = self.T.shape[0] - 1
        while True:
            if self.pivots > _MAX_PIVOTS:
                raise NumericalFailure("simplex pivot cap exceeded")
            enter = -1
            for j in range(ncols):
                if self.T[-1, j] < -_COST_TOL:
                    enter = j
                    break
            if enter < 0:
                return LPStatus.OPTIMAL
            leave = -1
            best_ratio = np.inf
            for r in range(m):
                a = self.T[r, enter]
                if a > _PIVOT_TOL:
                    ratio = self.T[r, -1] / a
                    if ratio < best_ratio - 1e-12 or (
                        abs(ratio - best_ratio) <= 1e-12 and (leave < 0 or self.basis[r] < self.basis[leave])
                    ):
                        best_ratio = ratio
                        leave = r
            if leave < 0:
                return LPStatus.UNBOUNDED
            self.pivot(leave, enter)


class _StandardForm:
    """Reduction of a LinearProgram to min c z, A z = b, z >= 0."""

    def __init__(self, lp: LinearProgram):
        n = lp.nvars
        # column description per original variable: (kind, data)
        # kind "shift": x = lb + z_j; "neg": x = ub - z_j; "split": x = z+ - z-
        self.cols = []
        col_of = []
        ncols = 0
        extra_ub_rows = []
        for j in range(n):
            lo, hi = lp.lb[j], lp.ub[j]
            if np.isfinite(lo):
                self.cols.append(("shift", j, lo))
                col_of.append((ncols,))
                if np.isfinite(hi):
                    extra_ub_rows.append((ncols, hi - lo))
                ncols += 1
            elif np.isfinite(hi):
                self.cols.append(("neg", j, hi))
                col_of.append((ncols,))
                ncols += 1
            else:
                self.cols.append(("split", j, 0.0))
                col_of.append((ncols, ncols + 1))
                ncols += 2

        def expand(A):
            out = np.zeros((A.shape[0], ncols))
            for j in range(n):
                kind, _, _ = self.cols[j]
                if kind == "shift":
                    out[:, col_of[j][0]] = A[:, j]
                elif kind == "neg":
                    out[:, col_of[j][0]] = -A[:, j]
                else:
                    out[:, col_of[j][0]] = A[:, j]
                    out[:, col_of[j][1]] = -A[:, j]
            return out

        def offset(A):
            shift = np.zeros(A.shape[0])
            for j in range(n):
                kind, _, base = self.cols[j]
                if kind in ("shift", "neg"):
                    shift += A[:, j] * base
            return shift

        A_eq = expand(lp.A_eq)
        b_eq = lp.b_eq - offset(lp.A_eq)
        A_ub = expand(lp.A_ub)
        b_ub = lp.b_ub - offset(lp.A_ub)
        if extra_ub_rows:
            rows = np.zeros((len(extra_ub_rows), ncols))
            rhs = np.zeros(len(extra_ub_rows))
            for i, (cidx, width) in enumerate(extra_ub_rows):
                rows[i, cidx] = 1.0
                rhs[i] = width
            A_ub = np.vstack([A_ub, rows])
            b_ub = np.concatenate([b_ub, rhs])

        m_eq, m_ub = A_eq.shape[0], A_ub.shape[0]
        nslack = m_ub
        A = np.zeros((m_eq + m_ub, ncols + nslack))
        A[:m_eq, :ncols] = A_eq
        A[m_eq:, :ncols] = A_ub
        for i in range(m_ub):
            A[m_eq + i, ncols + i] = 1.0
        b = np.concatenate([b_eq, b_ub])
        neg = b < 0
        A[neg, :] *= -1.0
        b[neg] *= -1.0

        self.A = A
        self.b = b
        self.ncols = ncols
        self.nslack = nslack
        self.col_of = col_of
        self.n = n

        c = np.zeros(ncols + nslack)
        for j in range(n):
            kind, _, _ = self.cols[j]
            if kind == "shift":
                c[col_of[j][0]] += lp.c[j]
            elif kind == "neg":
                c[col_of[j][0]] -= lp.c[j]
            else:
                c[col_of[j][0]] += lp.c[j]
                c[col_of[j][1]] -= lp.c[j]
        self.c = c

    def recover(self, z: np.ndarray) -> np.ndarray:
        x = np.zeros(self.n)
        for j in range(self.n):
            kind, _, base = self.cols[j]
            if kind == "shift":
                x[j] = base + z[self.col_of[j][0]]
            elif kind == "neg":
                x[j] = base - z[self.col_of[j][0]]
            else:
                x[j] = z[self.col_of[j][0]] - z[self.col_of[j][1]]
        return x


def _phase_one(std: _StandardForm):
    m = std.A.shape[0]
    nall = std.A.shape[1]
    A1 = np.hstack([std.A, np.eye(m)])
    tab = _Tableau(A1, std.b)
    tab.basis = list(range(nall, nall + m))
    tab.set_costs(np.concatenate([np.zeros(nall), np.ones(m)]))
    status = tab.run(nall + m)
    if status is not LPStatus.OPTIMAL:
        raise NumericalFailure("phase one cannot be unbounded")
    infeas = -tab.T[-1, -1]
    if infeas > _FEAS_TOL:
        return None
    # drive leftover artificials out of the basis; drop redundant rows
    drop = []
    for r in range(m):
        if tab.basis[r] >= nall:
            piv = -1
            for j in range(nall):
                if abs(tab.T[r, j]) > 1e-7:
                    piv = j
                    break
            if piv >= 0:
                tab.pivot(r, piv)
            else:
                drop.append(r)
    keep = [r for r in range(m) if r not in drop]
    T = tab.T[keep + [m], :]
    T = np.hstack([T[:, :nall], T[:, -1:]])
    out = _Tableau(np.zeros((len(keep), nall)), np.zeros(len(keep)))
    out.T = T
    out.basis = [tab.basis[r] for r in keep]
    out.pivots = tab.pivots
    return out


def solve_lp(lp: LinearProgram) -> LPOutcome:
    """Optimize; Optimal outcomes carry a vertex solution."""
    std = _StandardForm(lp)
    tab = _phase_one(std)
    if tab is None:
        return LPOutcome(LPStatus.INFEASIBLE)
    tab.set_costs(std.c)
    status = tab.run(std.A.shape[1])
    if status is LPStatus.UNBOUNDED:
        return LPOutcome(LPStatus.UNBOUNDED, iterations=tab.pivots)
    z = np.zeros(std.A.shape[1])
    for r, j in enumerate(tab.basis):
        z[j] = max(0.0, tab.T[r, -1])
    x = std.recover(z)
    return LPOutcome(LPStatus.OPTIMAL, x=x, value=float(lp.c @ x), iterations=tab.pivots)


def lp_feasible(lp: LinearProgram) -> LPOutcome:
    """Phase-one only: a feasible point or Infeasible."""
    std = _StandardForm(lp)
    tab = _phase_one(std)
    if tab is None:
        return LPOutcome(LPStatus.INFEASIBLE)
    z = np.zeros(std.A.shape[1])
    for r, j in enumerate(tab.basis):
        z[j] = max(0.0, tab.T[r, -1])
    x = std.recover(z)
    return LPOutcome(LPStatus.OPTIMAL, x=x, value=float(lp.c @ x), iterations=tab.pivots)
