import itertools

import numpy as np
import pytest

from coprelax.lpcore import LinearProgram, LPStatus, lp_feasible, solve_lp


def brute_force_min(lp: LinearProgram):
    """Vertex enumeration oracle: stack all constraints (incl. finite bounds)
    as rows, solve every n x n subsystem, keep feasible vertices."""
    n = lp.nvars
    rows = []
    rhs = []
    eq_count = lp.A_eq.shape[0]
    for i in range(lp.A_eq.shape[0]):
        rows.append(lp.A_eq[i])
        rhs.append(lp.b_eq[i])
    for i in range(lp.A_ub.shape[0]):
        rows.append(lp.A_ub[i])
        rhs.append(lp.b_ub[i])
    for j in range(n):
        if np.isfinite(lp.lb[j]):
            e = np.zeros(n)
            e[j] = -1.0
            rows.append(e)
            rhs.append(-lp.lb[j])
        if np.isfinite(lp.ub[j]):
            e = np.zeros(n)
            e[j] = 1.0
            rows.append(e)
            rhs.append(lp.ub[j])
    rows = np.array(rows)
    rhs = np.array(rhs)
    best = None
    for idx in itertools.combinations(range(len(rows)), n):
        sub = rows[list(idx)]
        if abs(np.linalg.det(sub)) < 1e-9:
            continue
        x = np.linalg.solve(sub, rhs[list(idx)])
        ok = np.all(rows @ x <= rhs + 1e-7) and np.all(np.abs(rows[:eq_count] @ x - rhs[:eq_count]) <= 1e-7)
        if ok:
            val = float(lp.c @ x)
            if best is None or val < best:
                best = val
    return best


def test_min_x_subject_to_x_ge_1():
    lp = LinearProgram(c=[1.0], A_ub=[[-1.0]], b_ub=[-1.0])
    out = solve_lp(lp)
    assert out.status is LPStatus.OPTIMAL
    assert out.x[0] == pytest.approx(1.0)
    assert out.value == pytest.approx(1.0)


def test_infeasible_interval():
    lp = LinearProgram(c=[0.0], A_ub=[[1.0], [-1.0]], b_ub=[-1.0, -1.0])
    assert solve_lp(lp).status is LPStatus.INFEASIBLE


def test_unbounded():
    lp = LinearProgram(c=[-1.0], A_ub=[[-1.0]], b_ub=[0.0])
    assert solve_lp(lp).status is LPStatus.UNBOUNDED


def test_equality_rows():
    # min x + y  s.t.  x + y = 2, x - y <= 0, free vars
    lp = LinearProgram(c=[1.0, 1.0], A_eq=[[1.0, 1.0]], b_eq=[2.0], A_ub=[[1.0, -1.0]], b_ub=[0.0])
    out = solve_lp(lp)
    assert out.status is LPStatus.OPTIMAL
    assert out.value == pytest.approx(2.0)


def test_bounds_handling():
    lp = LinearProgram(c=[1.0, -1.0], lb=[0.5, -np.inf], ub=[np.inf, 2.5])
    out = solve_lp(lp)
    assert out.status is LPStatus.OPTIMAL
    assert out.x == pytest.approx([0.5, 2.5])


def test_lp_feasible_empty():
    out = lp_feasible(LinearProgram(c=np.zeros(2)))
    assert out.status is LPStatus.OPTIMAL
    assert np.allclose(out.x, 0.0)


def test_lp_feasible_kernel_normalization_infeasible():
    # M full rank makes M d = 0 force d = 0, contradicting sum d = 1
    M = np.array([[2.0, 0.0], [0.0, 3.0]])
    lp = LinearProgram(
        c=np.zeros(2),
        A_eq=np.vstack([M, np.ones((1, 2))]),
        b_eq=[0.0, 0.0, 1.0],
    )
    assert lp_feasible(lp).status is LPStatus.INFEASIBLE


def test_remark_lp_fixture_feasible():
    # kernel LP of the rank-deficient fixture: rows [diag(4,0); O], B = [-1, 0]
    M = np.array([[4.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    lp = LinearProgram(
        c=np.zeros(2),
        A_eq=np.vstack([M, np.ones((1, 2))]),
        b_eq=[0.0, 0.0, 0.0, 0.0, 1.0],
        A_ub=[[-1.0, 0.0], [0.0, 0.0]],
        b_ub=[0.0, 0.0],
    )
    out = lp_feasible(lp)
    assert out.status is LPStatus.OPTIMAL
    assert out.x == pytest.approx([0.0, 1.0], abs=1e-9)


def test_feasible_point_satisfies_constraints():
    rng = np.random.default_rng(2)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 6))
        A = rng.standard_normal((m, n))
        x0 = np.zeros(n)
        x0[0] = 1.0 if n else 0.0  # polytope built to contain e1
        b = A @ x0 + rng.uniform(0.1, 1.0, size=m)
        lp = LinearProgram(c=rng.standard_normal(n), A_ub=A, b_ub=b, lb=-10 * np.ones(n), ub=10 * np.ones(n))
        out = lp_feasible(lp)
        assert out.status is LPStatus.OPTIMAL
        assert np.all(A @ out.x <= b + 1e-8)


def test_agrees_with_vertex_enumeration():
    rng = np.random.default_rng(7)
    solved = 0
    for _ in range(100):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(2, 9))
        A = rng.standard_normal((m, n))
        x0 = rng.uniform(-1, 1, size=n)
        b = A @ x0 + rng.uniform(0.05, 1.0, size=m)
        c = rng.standard_normal(n)
        lp = LinearProgram(c=c, A_ub=A, b_ub=b, lb=-5 * np.ones(n), ub=5 * np.ones(n))
        out = solve_lp(lp)
        assert out.status is LPStatus.OPTIMAL
        expected = brute_force_min(lp)
        assert expected is not None
        assert out.value == pytest.approx(expected, abs=1e-7)
        # vertex solutions respect all constraints
        assert np.all(A @ out.x <= b + 1e-8)
        assert np.all(out.x >= lp.lb - 1e-8) and np.all(out.x <= lp.ub + 1e-8)
        assert out.value == pytest.approx(float(c @ out.x), rel=1e-10)
        solved += 1
    assert solved == 100


def test_degenerate_cycling_guard():
    # classic Beale-style degeneracy; Bland's rule must terminate
    c = np.array([-0.75, 150.0, -0.02, 6.0])
    A = np.array(
        [
            [0.25, -60.0, -0.04, 9.0],
            [0.5, -90.0, -0.02, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
    )
    b = np.array([0.0, 0.0, 1.0])
    lp = LinearProgram(c=c, A_ub=A, b_ub=b, lb=np.zeros(4))
    out = solve_lp(lp)
    assert out.status is LPStatus.OPTIMAL
    assert out.value == pytest.approx(-0.05, abs=1e-9)
