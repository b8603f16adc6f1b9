"""Tractable inner approximations of the cone-copositive cone.

A matrix M of order k + m is copositive on R^k_+ x R^m exactly when the
quartic obtained by squaring the first k coordinates,

    p_M(y) = sum_{i,j<k} M_ij y_i^2 y_j^2 + 2 sum_{i<k<=j} M_ij y_i^2 y_j
             + sum_{i,j>=k} M_ij y_i y_j ,

is nonnegative everywhere.  Two certifiable sufficient conditions give the
hierarchy levels:

* SOS: p_M(y) ||y||^(2d) is a sum of squares, decided through a Gram-matrix
  feasibility search (level d).
* Handelman: q_M(y) = y^T M y is a nonnegative combination of products of
  the affine inequalities cutting the compact base polytope of the cone,
  with total product degree <= d, decided by one LP feasibility problem.

Both memberships imply copositivity, so replacing the exact test inside the
relaxation search yields certified lower bounds that increase with d.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matcore
from .copositivity import ConeSpec
from .errors import CombinatorialBlowup
from .lpcore import LinearProgram, lp_feasible
from .model import StdProblem, lagrangian_matrix
from .relax import NEG_INF, Bound, BoundKind, SearchConfig, theta_semi


class Poly:
    """Sparse real polynomial: map from exponent tuples to coefficients."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms=None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for expo, coeff in dict(terms).items():
                self.add_term(expo, coeff)

    def add_term(self, expo, coeff: float):
        expo = tuple(int(e) for e in expo)
        if len(expo) != self.nvars:
            raise ValueError("exponent dimension mismatch")
        new = self.terms.get(expo, 0.0) + float(coeff)
        if new == 0.0:
            self.terms.pop(expo, None)
        else:
            self.terms[expo] = new

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Poly":
        out = cls(nvars)
        if value != 0.0:
            out.add_term((0,) * nvars, value)
        return out

    @classmethod
    def variable(cls, nvars: int, i: int, coeff: float = 1.0) -> "Poly":
        out = cls(nvars)
        e = [0] * nvars
        e[i] = 1
        out.add_term(e, coeff)
        return out

    def copy(self) -> "Poly":
        out = Poly(self.nvars)
        out.terms = dict(self.terms)
        return out

    def __add__(self, other: "Poly") -> "Poly":
        out = self.copy()
        for expo, coeff in other.terms.items():
            out.add_term(expo, coeff)
        return out

    def scale(self, c: float) -> "Poly":
        out = Poly(self.nvars)
        if c != 0.0:
            out.terms = {e: c * v for e, v in self.terms.items()}
        return out

    def __mul__(self, other: "Poly") -> "Poly":
        out = Poly(self.nvars)
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out.add_term(tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
        return out

    def __call__(self, y) -> float:
        y = np.asarray(y, dtype=float).reshape(-1)
        total = 0.0
        for expo, coeff in self.terms.items():
            term = coeff
            for yi, ei in zip(y, expo):
                if ei:
                    term *= yi**ei
            total += term
        return float(total)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)


def quadratic_poly(M) -> Poly:
    M = matcore.symmetrize(M)
    n = M.shape[0]
    out = Poly(n)
    for i in range(n):
        for j in range(i, n):
            coeff = M[i, j] if i == j else 2.0 * M[i, j]
            if coeff != 0.0:
                e = [0] * n
                e[i] += 1
                e[j] += 1
                out.add_term(e, coeff)
    return out


def quartic_pm(M, p: int) -> Poly:
    """The cone-indicator quartic of M with the first p+1 coordinates squared.

    Satisfies p_M(y) = z^T M z for z = (y_square_block^2, y_free_block), so
    nonnegativity of p_M over all of R^(p+n+1) is exactly cone-copositivity.
    """
    M = matcore.symmetrize(M)
    n = M.shape[0]
    k = p + 1
    if k > n:
        raise ValueError("squared block exceeds matrix order")
    out = Poly(n)
    for i in range(n):
        for j in range(i, n):
            coeff = M[i, j] if i == j else 2.0 * M[i, j]
            if coeff == 0.0:
                continue
            e = [0] * n
            e[i] += 2 if i < k else 1
            e[j] += 2 if j < k else 1
            out.add_term(e, coeff)
    return out


def _pm_values(M: np.ndarray, k: int, Y: np.ndarray) -> np.ndarray:
    """Vectorized p_M evaluation via the squared substitution."""
    Z = Y.copy()
    Z[:, :k] = Z[:, :k] ** 2
    return np.einsum("ij,jk,ik->i", Z, M, Z)


def _norm_power(nvars: int, d: int) -> Poly:
    out = Poly.constant(nvars, 1.0)
    if d == 0:
        return out
    nrm = Poly(nvars)
    for i in range(nvars):
        e = [0] * nvars
        e[i] = 2
        nrm.add_term(e, 1.0)
    for _ in range(d):
        out = out * nrm
    return out


@dataclass(frozen=True)
class SosCert:
    level: int
    basis: tuple
    gram: np.ndarray
    residual: float
    gram_lambda_min: float


@dataclass(frozen=True)
class HandelmanCert:
    level: int
    exponents: tuple
    coeffs: np.ndarray
    residual: float


# ---------------------------------------------------------------------------
# SOS membership


def _hull_member(point: np.ndarray, E: np.ndarray) -> bool:
    """Is the integer point in the convex hull of the rows of E?  Small LP."""
    r = E.shape[0]
    out = lp_feasible(
        LinearProgram(
            c=np.zeros(r),
            A_eq=np.vstack([E.T, np.ones((1, r))]),
            b_eq=np.concatenate([point, [1.0]]),
            lb=np.zeros(r),
        )
    )
    return out.optimal


def _sos_basis(target: Poly) -> list:
    """Monomial basis filtered by the half Newton polytope of the target."""
    nvars = target.nvars
    E = np.array(sorted(target.terms.keys()), dtype=float)
    if E.size == 0:
        return []
    half = int(np.ceil(target.degree() / 2))
    var_max = np.ceil(E.max(axis=0) / 2).astype(int)
    total_min = int(np.floor(E.sum(axis=1).min() / 2))
    candidates = []
    for expo in itertools.product(*(range(v + 1) for v in var_max)):
        s = sum(expo)
        if total_min <= s <= half:
            candidates.append(expo)
    basis = [e for e in candidates if _hull_member(2.0 * np.array(e, dtype=float), E)]
    return sorted(basis)


def _gram_system(basis: list, target: Poly):
    """Linear map from scaled Gram coordinates to polynomial coefficients.

    Coordinates are (G_aa, sqrt(2) G_ab) so that the Euclidean metric on the
    coordinate vector equals the Frobenius metric on G; eigenvalue clipping
    and affine projection are then orthogonal in the same geometry.
    """
    N = len(basis)
    pairs = [(a, b) for a in range(N) for b in range(a, N)]
    mono_index = {}

    def midx(expo):
        if expo not in mono_index:
            mono_index[expo] = len(mono_index)
        return mono_index[expo]

    entries = []
    for pidx, (a, b) in enumerate(pairs):
        expo = tuple(x + y for x, y in zip(basis[a], basis[b]))
        factor = 1.0 if a == b else 2.0 / np.sqrt(2.0)  # d(coeff)/d(scaled coord)
        entries.append((midx(expo), pidx, factor))
    for expo in target.terms:
        midx(expo)
    A = np.zeros((len(mono_index), len(pairs)))
    for r, cidx, fac in entries:
        A[r, cidx] += fac
    t = np.zeros(len(mono_index))
    for expo, coeff in target.terms.items():
        t[mono_index[expo]] = coeff
    return A, t, pairs


def _unvech(g: np.ndarray, pairs, N: int) -> np.ndarray:
    G = np.zeros((N, N))
    for val, (a, b) in zip(g, pairs):
        if a == b:
            G[a, a] = val
        else:
            G[a, b] = G[b, a] = val / np.sqrt(2.0)
    return G


def _vech(G: np.ndarray, pairs) -> np.ndarray:
    return np.array([G[a, a] if a == b else np.sqrt(2.0) * G[a, b] for a, b in pairs])


def sos_membership(M, p: int, d: int, max_ap_iter: int = 2000, nm_iter: int = 400) -> Optional[SosCert]:
    """Search for a psd Gram certificate that p_M ||y||^(2d) is a sum of squares.

    Alternating projections (psd clip / affine least squares) find strictly
    feasible certificates quickly; boundary-only certificates (common at the
    exactness threshold) are finished by a concave maximization of the
    smallest Gram eigenvalue over the affine coefficient-match subspace.
    Returns None when no certificate is found (inconclusive, never a
    refutation) or when sampling finds a negative value of p_M (a genuine
    refutation of copositivity, so membership is impossible at every level).
    """
    M = matcore.symmetrize(M)
    n = M.shape[0]
    k = p + 1
    rng = np.random.default_rng(12345)
    Y = rng.standard_normal((400, n)) * rng.uniform(0.2, 3.0, size=(400, 1))
    vals = _pm_values(M, k, Y)
    if float(vals.min()) < -1e-10 * (1.0 + float(np.abs(M).max())):
        return None

    target = quartic_pm(M, p) * _norm_power(n, d)
    basis = _sos_basis(target)
    if not basis:
        return None
    A, t, pairs = _gram_system(basis, target)
    N = len(basis)

    g0, *_ = np.linalg.lstsq(A, t, rcond=None)
    if float(np.linalg.norm(A @ g0 - t)) > 1e-8 * (1.0 + float(np.linalg.norm(t))):
        return None  # coefficients cannot be matched in this basis
    U, sv, Vt = np.linalg.svd(A)
    rank = int(np.sum(sv > 1e-11 * (sv[0] if sv.size else 1.0)))
    null = Vt[rank:].T  # orthonormal columns spanning the affine directions

    accept = 1e-9 * (1.0 + float(np.abs(M).max()))

    def lam_min_of(g):
        return matcore.eig(_unvech(g, pairs, N)).lambda_min

    def finalize(g):
        G = _unvech(g, pairs, N)
        recon = _vech(G, pairs)
        residual = float(np.abs(A @ recon - t).max())
        return SosCert(
            level=d,
            basis=tuple(basis),
            gram=G,
            residual=residual,
            gram_lambda_min=float(matcore.eig(G).lambda_min),
        )

    g = g0.copy()
    best_g, best_lam = g.copy(), lam_min_of(g)
    if best_lam >= -accept:
        return finalize(g)
    for _ in range(max_ap_iter):
        G = _unvech(g, pairs, N)
        dec = matcore.eig(G)
        clipped = dec.vectors @ np.diag(np.maximum(dec.values, 0.0)) @ dec.vectors.T
        g = _vech(matcore.symmetrize(clipped), pairs)
        g = g0 + null @ (null.T @ (g - g0))  # back to exact coefficient match
        lam = lam_min_of(g)
        if lam > best_lam:
            best_g, best_lam = g.copy(), lam
        if lam >= -accept:
            return finalize(g)

    D = null.shape[1]
    if D == 0 or D > 60:
        return None
    # concave polish: maximize the smallest eigenvalue over the null space
    from .relax import _neldermead_max

    theta0 = null.T @ (best_g - g0)

    def f(theta):
        return lam_min_of(g0 + null @ theta)

    # unconstrained concave maximization; reuse the simplex search without
    # the nonnegativity clip by shifting coordinates
    shift = np.abs(theta0) + 1.0

    def f_shifted(z):
        return f(z - shift)

    z_best, lam = _neldermead_max(f_shifted, theta0 + shift, nm_iter, 1e-14)
    if lam >= -accept:
        return finalize(g0 + null @ (z_best - shift))
    return None


# ---------------------------------------------------------------------------
# Handelman membership


def _base_polytope_inequalities(cone: ConeSpec) -> list:
    """Affine h_j >= 0 cutting the compact base of the cone.

    Orthant coordinates: s_j >= 0 and sum s <= 1; free coordinates: the box
    |x_i| <= 1.  Scaling the problem into the base is the caller's business.
    """
    nvars = cone.dim
    hs = []
    for j in range(cone.k):
        hs.append(Poly.variable(nvars, j))
    sum_s = Poly.constant(nvars, 1.0)
    for j in range(cone.k):
        sum_s = sum_s + Poly.variable(nvars, j, -1.0)
    hs.append(sum_s)
    for i in range(cone.k, nvars):
        hs.append(Poly.constant(nvars, 1.0) + Poly.variable(nvars, i, -1.0))
        hs.append(Poly.constant(nvars, 1.0) + Poly.variable(nvars, i, 1.0))
    return hs


def handelman_membership(M, cone: ConeSpec, d: int, term_cap: int = 200_000) -> Optional[HandelmanCert]:
    """LP search for q_M = sum_alpha c_alpha prod_j h_j^alpha_j, c_alpha >= 0.

    h_j are the base-polytope inequalities of the cone and |alpha| <= d.
    Certificates prove cone-copositivity of M; None is inconclusive.

    Caveat: because q_M vanishes at the origin while every product free of
    slack factors is strictly positive there, an exact nonnegative
    combination forces the free-block quadratic to vanish identically.  The
    levels are therefore mainly informative for orthant-only cones (m = 0);
    with free coordinates present the test stays sound but rarely certifies.
    """
    M = matcore.symmetrize(M)
    if M.shape[0] != cone.dim:
        raise ValueError("matrix order does not match cone dimension")
    hs = _base_polytope_inequalities(cone)
    m = len(hs)
    target = quadratic_poly(M)

    alphas = []
    for total in range(d + 1):
        for combo in itertools.combinations_with_replacement(range(m), total):
            alpha = [0] * m
            for j in combo:
                alpha[j] += 1
            alphas.append(tuple(alpha))

    products = {}
    unit = Poly.constant(cone.dim, 1.0)

    def product_of(alpha):
        if alpha in products:
            return products[alpha]
        if sum(alpha) == 0:
            products[alpha] = unit
            return unit
        j = next(i for i, a in enumerate(alpha) if a > 0)
        sub = list(alpha)
        sub[j] -= 1
        out = product_of(tuple(sub)) * hs[j]
        products[alpha] = out
        return out

    mono_index = {}
    total_terms = 0
    cols = []
    for alpha in alphas:
        poly = product_of(alpha)
        total_terms += len(poly.terms)
        if total_terms > term_cap:
            raise CombinatorialBlowup(f"Handelman expansion exceeded {term_cap} monomials")
        cols.append(poly)
        for expo in poly.terms:
            mono_index.setdefault(expo, len(mono_index))
    for expo in target.terms:
        mono_index.setdefault(expo, len(mono_index))

    A = np.zeros((len(mono_index), len(alphas)))
    for cidx, poly in enumerate(cols):
        for expo, coeff in poly.terms.items():
            A[mono_index[expo], cidx] = coeff
    t = np.zeros(len(mono_index))
    for expo, coeff in target.terms.items():
        t[mono_index[expo]] = coeff

    out = lp_feasible(LinearProgram(c=np.zeros(len(alphas)), A_eq=A, b_eq=t, lb=np.zeros(len(alphas))))
    if not out.optimal:
        return None
    coeffs = np.maximum(out.x, 0.0)
    residual = float(np.abs(A @ coeffs - t).max())
    if residual > 1e-7 * (1.0 + float(np.abs(t).max())):
        return None
    return HandelmanCert(level=d, exponents=tuple(alphas), coeffs=coeffs, residual=residual)


# ---------------------------------------------------------------------------
# hierarchy-backed relaxation bound


def hierarchy_bound(S: StdProblem, d: int, method: str = "sos", cfg: SearchConfig = SearchConfig()) -> Bound:
    """Relaxation value with the copositivity test replaced by level-d membership.

    Inner approximation: every accepted shift carries a hierarchy
    certificate, so the result is a valid lower bound on the copositive
    relaxation value and hence on the model optimum.
    """
    method = method.lower()
    if method not in ("sos", "handelman"):
        raise ValueError("method must be 'sos' or 'handelman'")
    cone = ConeSpec(S.p + 1, S.n)

    def member(u, mu):
        Mat = lagrangian_matrix(S, u, mu)
        if method == "sos":
            return sos_membership(Mat, S.p, d)
        return handelman_membership(Mat, cone, d)

    def member_sup(u):
        """Largest certified shift at u, with its certificate."""
        theta = theta_semi(S, u, method="auto", tol=cfg.tol, bisect_gap=cfg.bisect_gap)
        if theta == NEG_INF:
            return NEG_INF, None
        cert = member(u, theta)
        if cert is not None:
            return theta, cert
        hi = theta
        lo = theta - 1.0
        cert_lo = member(u, lo)
        doublings = 0
        while cert_lo is None:
            lo = hi - 2.0 * (hi - lo)
            doublings += 1
            if doublings > 40:
                return NEG_INF, None
            cert_lo = member(u, lo)
        while hi - lo > cfg.hier_gap * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            cert_mid = member(u, mid)
            if cert_mid is not None:
                lo, cert_lo = mid, cert_mid
            else:
                hi = mid
        return lo, cert_lo

    rng = np.random.default_rng(cfg.seed + 2)
    seeds = [np.array([a, b, c]) for a in cfg.hier_grid for b in cfg.hier_grid for c in cfg.hier_grid]
    for extra in cfg.extra_seeds:
        seeds.append(np.asarray(extra, dtype=float).reshape(3))
    for _ in range(4):
        seeds.append(10.0 ** rng.uniform(-1, 3, size=3) * (rng.uniform(size=3) < 0.7))

    best_val, best_u, best_cert = NEG_INF, None, None
    for u in seeds:
        val, cert = member_sup(u)
        if val > best_val:
            best_val, best_u, best_cert = val, u, cert
    trace = {"method": method, "level": d, "seeds": len(seeds)}
    if best_val == NEG_INF:
        return Bound(BoundKind.HIERARCHY, NEG_INF, trace=trace, level=d)

    # light compass polish over u (membership tests are expensive)
    u, val, cert = best_u, best_val, best_cert
    step = np.maximum(0.25, 0.25 * np.abs(u))
    for _ in range(cfg.hier_polish_rounds):
        improved = False
        for i in range(3):
            for sign in (1.0, -1.0):
                cand = u.copy()
                cand[i] = max(0.0, cand[i] + sign * step[i])
                cval, ccert = member_sup(cand)
                if cval > val + 1e-12:
                    u, val, cert = cand, cval, ccert
                    improved = True
        if not improved:
            step *= 0.5
    from .model import Multipliers

    trace["certificate"] = cert
    return Bound(BoundKind.HIERARCHY, float(val), Multipliers(u, np.zeros(S.p)), trace=trace, level=d)
