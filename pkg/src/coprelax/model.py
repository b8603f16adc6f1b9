"""Problem data and the slack-variable standardization.

The model is

    minimize    x^T Q0 x + 2 q0^T x
    subject to  x^T Q1 x + 2 q1^T x <= 1
                ||A x - a||^2 <= 1
                B x <= b

with x in R^n, A of shape (l, n) and B of shape (p, n); empty blocks are
allowed.  Introducing slacks s = b - B x turns the polyhedral part into one
quadratic equation ||B x + s - b||^2 <= 0 over y = (s, x) in R^p_+ x R^n,
which is the form every relaxation below works on.  The lifted variable
ordering is fixed package-wide as (homogenizing 1, s_1..s_p, x_1..x_n).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import DimensionMismatch


@dataclass(frozen=True)
class QuadFunc:
    """Quadratic q(x) = x^T H x - 2 d^T x + gamma.

    Note the sign convention: the model objective x^T Q0 x + 2 q0^T x wraps
    as QuadFunc(H=Q0, d=-q0, gamma=0).
    """

    H: np.ndarray
    d: np.ndarray
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "H", matcore.symmetrize(self.H))
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float).reshape(-1))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.d.shape[0] != self.H.shape[0]:
            raise DimensionMismatch("QuadFunc: d does not match H")

    @property
    def dim(self) -> int:
        return self.H.shape[0]


def evaluate(q: QuadFunc, x) -> float:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != q.dim:
        raise DimensionMismatch(f"point of dimension {x.shape[0]}, expected {q.dim}")
    return float(x @ q.H @ x - 2.0 * q.d @ x + q.gamma)


def _as_matrix(M, rows: int, cols: int, name: str) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        A = A.reshape(rows, cols) if rows * cols == 0 else A.reshape(-1, cols)
    if A.ndim != 2 or A.shape != (rows, cols):
        raise DimensionMismatch(f"{name}: expected shape {(rows, cols)}, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionMismatch(f"{name}: entries must be finite")
    return A


@dataclass(frozen=True)
class ETRProblem:
    """Data of the extended trust-region model above."""

    n: int
    Q0: np.ndarray
    q0: np.ndarray
    Q1: np.ndarray
    q1: np.ndarray
    A: np.ndarray
    a: np.ndarray
    B: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        n = self.n
        object.__setattr__(self, "Q0", matcore.symmetrize(self.Q0))
        object.__setattr__(self, "Q1", matcore.symmetrize(self.Q1))
        q0 = np.asarray(self.q0, dtype=float).reshape(-1)
        q1 = np.asarray(self.q1, dtype=float).reshape(-1)
        A = np.asarray(self.A, dtype=float).reshape(-1, n) if np.asarray(self.A).size else np.zeros((0, n))
        a = np.asarray(self.a, dtype=float).reshape(-1)
        B = np.asarray(self.B, dtype=float).reshape(-1, n) if np.asarray(self.B).size else np.zeros((0, n))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if self.Q0.shape[0] != n or self.Q1.shape[0] != n:
            raise DimensionMismatch("Q0/Q1 must be n x n")
        if q0.shape[0] != n or q1.shape[0] != n:
            raise DimensionMismatch("q0/q1 must have length n")
        if a.shape[0] != A.shape[0]:
            raise DimensionMismatch("a must match the row count of A")
        if b.shape[0] != B.shape[0]:
            raise DimensionMismatch("b must match the row count of B")
        for name, arr in (("q0", q0), ("q1", q1), ("A", A), ("a", a), ("B", B), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise DimensionMismatch(f"{name}: entries must be finite")
        object.__setattr__(self, "q0", q0)
        object.__setattr__(self, "q1", q1)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "b", b)

    @property
    def ell(self) -> int:
        return self.A.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[0]

    def f0(self) -> QuadFunc:
        return QuadFunc(self.Q0, -self.q0, 0.0)

    def f1(self) -> QuadFunc:
        return QuadFunc(self.Q1, -self.q1, -1.0)

    def f2(self) -> QuadFunc:
        return QuadFunc(self.A.T @ self.A, self.A.T @ self.a, float(self.a @ self.a) - 1.0)


def is_feasible(P: ETRProblem, x, tol: float = 1e-8) -> bool:
    """All three constraint families satisfied within an absolute tolerance."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != P.n:
        raise DimensionMismatch("point dimension mismatch")
    if evaluate(P.f1(), x) > tol:
        return False
    if evaluate(P.f2(), x) > tol:
        return False
    if P.p and np.any(P.B @ x - P.b > tol):
        return False
    return True


@dataclass(frozen=True)
class StdProblem:
    """Slack-standardized form over y = (s, x) in R^p_+ x R^n.

    fbar holds the four quadratics on R^(p+n); M the homogenized matrices of
    fbar[1..3]; J the homogenizing selector of order p+n+1.
    """

    p: int
    n: int
    fbar: tuple
    Bbar: np.ndarray
    M: tuple
    J: np.ndarray
    source: ETRProblem = field(repr=False)

    @property
    def dim(self) -> int:
        """Dimension of the lifted space (1, s, x)."""
        return self.p + self.n + 1

    def slack(self, x) -> np.ndarray:
        return self.source.b - self.source.B @ np.asarray(x, dtype=float).reshape(-1)


def _pad(q: QuadFunc, p: int) -> QuadFunc:
    """Extend a quadratic on R^n to R^(p+n) with p leading zero coordinates."""
    return QuadFunc(
        matcore.direct_sum(np.zeros((p, p)), q.H),
        np.concatenate([np.zeros(p), q.d]),
        q.gamma,
    )


def standardize(P: ETRProblem) -> StdProblem:
    p, n = P.p, P.n
    Bbar = np.hstack([np.eye(p), P.B]) if p else np.zeros((0, n))
    f0 = _pad(P.f0(), p)
    f1 = _pad(P.f1(), p)
    f2 = _pad(P.f2(), p)
    f3 = QuadFunc(Bbar.T @ Bbar, Bbar.T @ P.b, float(P.b @ P.b))
    fbar = (f0, f1, f2, f3)
    M = tuple(matcore.shor_matrix(f) for f in fbar[1:])
    return StdProblem(p=p, n=n, fbar=fbar, Bbar=Bbar, M=M, J=matcore.jay(p + n + 1), source=P)


@dataclass(frozen=True)
class Multipliers:
    """u for the three quadratic constraints, v for the slack signs.

    v is sign-free: generalized KKT pairs allow negative linear-constraint
    multipliers, only u must stay in the nonnegative orthant.
    """

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if u.shape[0] != 3:
            raise DimensionMismatch("u must have length 3")
        if np.any(u < 0):
            raise ValueError("u must be nonnegative")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


def _check_u(u) -> np.ndarray:
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.shape[0] != 3:
        raise DimensionMismatch("u must have length 3")
    if np.any(u < -1e-12):
        raise ValueError("u must be nonnegative")
    return np.maximum(u, 0.0)


def lagrangian(S: StdProblem, y, u, v) -> float:
    """L(y; u, v) = fbar0(y) + sum_i u_i fbar_i(y) - v^T s."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != S.p + S.n:
        raise DimensionMismatch("y must live in R^(p+n)")
    u = _check_u(u)
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != S.p:
        raise DimensionMismatch("v must have length p")
    val = evaluate(S.fbar[0], y)
    for i in range(3):
        val += u[i] * evaluate(S.fbar[i + 1], y)
    return float(val - v @ y[: S.p])


def lagrangian_quadratic(S: StdProblem, u, v=None) -> QuadFunc:
    """The quadratic y -> L(y; u, v) as a QuadFunc on R^(p+n)."""
    u = _check_u(u)
    H = S.fbar[0].H + sum(u[i] * S.fbar[i + 1].H for i in range(3))
    d = S.fbar[0].d + sum(u[i] * S.fbar[i + 1].d for i in range(3))
    gamma = S.fbar[0].gamma + sum(u[i] * S.fbar[i + 1].gamma for i in range(3))
    if v is not None:
        v = np.asarray(v, dtype=float).reshape(-1)
        if v.shape[0] != S.p:
            raise DimensionMismatch("v must have length p")
        d = d + np.concatenate([0.5 * v, np.zeros(S.n)])
    return QuadFunc(H, d, gamma)


def lagrangian_matrix(S: StdProblem, u, mu: float) -> np.ndarray:
    """Homogenized matrix of L(.; u, 0) minus mu on the (0, 0) entry.

    Order p+n+1, blocks laid out in the (1, s, x) ordering.  For every
    z = (1, y) it satisfies z^T M z = L(y; u, 0) - mu.
    """
    M = matcore.shor_matrix(lagrangian_quadratic(S, u))
    M[0, 0] -= float(mu)
    return M
