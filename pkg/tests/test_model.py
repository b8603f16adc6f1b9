import numpy as np
import pytest

from coprelax import matcore
from coprelax.errors import DimensionMismatch
from coprelax.model import (
    ETRProblem,
    Multipliers,
    QuadFunc,
    evaluate,
    is_feasible,
    lagrangian,
    lagrangian_matrix,
    standardize,
)


def make_symmetric_problem(rng, n=2, p=2, ell=1):
    Q0 = rng.standard_normal((n, n))
    Q1 = rng.standard_normal((n, n))
    return ETRProblem(
        n=n,
        Q0=0.5 * (Q0 + Q0.T),
        q0=rng.standard_normal(n),
        Q1=0.5 * (Q1 + Q1.T),
        q1=rng.standard_normal(n),
        A=rng.standard_normal((ell, n)),
        a=rng.standard_normal(ell),
        B=rng.standard_normal((p, n)),
        b=rng.standard_normal(p),
    )


def test_evaluate_example_objective(example_51):
    assert evaluate(example_51.f0(), [1.0, 1.0]) == pytest.approx(3.5)


def test_evaluate_at_origin_gives_gamma():
    q = QuadFunc(np.eye(2), np.array([1.0, 2.0]), -7.5)
    assert evaluate(q, np.zeros(2)) == -7.5


def test_slack_quadratic_vanishes_on_feasible_slacks():
    rng = np.random.default_rng(3)
    P = make_symmetric_problem(rng)
    S = standardize(P)
    x = rng.standard_normal(P.n)
    s = P.b - P.B @ x
    assert evaluate(S.fbar[3], np.concatenate([s, x])) == pytest.approx(0.0, abs=1e-12)


def test_standardize_example_slack_form(example_51):
    S = standardize(example_51)
    # f3(s, x) = ||s - x||^2
    y = np.array([1.0, 2.0, -0.5, 3.0])
    s, x = y[:2], y[2:]
    assert evaluate(S.fbar[3], y) == pytest.approx(float(np.sum((s - x) ** 2)))


def test_standardize_no_linear_block():
    rng = np.random.default_rng(4)
    P = make_symmetric_problem(rng, p=0)
    S = standardize(P)
    assert S.p == 0
    y = rng.standard_normal(P.n)
    assert evaluate(S.fbar[3], y) == 0.0


def test_standardize_preserves_constraint_values():
    rng = np.random.default_rng(5)
    for _ in range(20):
        P = make_symmetric_problem(rng, n=int(rng.integers(1, 4)), p=int(rng.integers(0, 4)), ell=int(rng.integers(0, 3)))
        S = standardize(P)
        x = rng.standard_normal(P.n)
        s = P.b - P.B @ x
        y = np.concatenate([s, x])
        for fi, fbar in ((P.f0(), S.fbar[0]), (P.f1(), S.fbar[1]), (P.f2(), S.fbar[2])):
            assert evaluate(fbar, y) == pytest.approx(evaluate(fi, x), rel=1e-12, abs=1e-12)


def test_standardize_deterministic(example_51):
    S1 = standardize(example_51)
    S2 = standardize(example_51)
    assert np.array_equal(S1.Bbar, S2.Bbar)
    for a, b in zip(S1.M, S2.M):
        assert np.array_equal(a, b)


def test_lagrangian_matrix_example_display(example_51):
    S = standardize(example_51)
    u3, mu = 0.7, 0.3
    u = 0.7
    expected = np.array(
        [
            [-mu, 0, 0, 0, 0],
            [0, u, 0, -u, 0],
            [0, 0, u, 0, -u],
            [0, -u, 0, 0.5 + u, 1.0],
            [0, 0, -u, 1.0, 1.0 + u],
        ]
    )
    assert np.array_equal(lagrangian_matrix(S, [0.0, 0.0, u3], mu), expected)


def test_lagrangian_matrix_zero_multipliers_is_objective_matrix(example_51):
    S = standardize(example_51)
    assert np.array_equal(lagrangian_matrix(S, np.zeros(3), 0.0), matcore.shor_matrix(S.fbar[0]))


def test_lagrangian_matrix_quadratic_form_identity():
    rng = np.random.default_rng(6)
    for _ in range(1000):
        P = make_symmetric_problem(rng, n=int(rng.integers(1, 4)), p=int(rng.integers(0, 4)), ell=int(rng.integers(0, 3)))
        S = standardize(P)
        u = rng.uniform(0, 2, size=3)
        mu = float(rng.standard_normal())
        y = rng.standard_normal(S.p + S.n)
        z = np.concatenate([[1.0], y])
        lhs = float(z @ lagrangian_matrix(S, u, mu) @ z)
        rhs = lagrangian(S, y, u, np.zeros(S.p)) - mu
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_lagrangian_example_escape_direction(example_51):
    # along s = x = (-t, t) the slack penalty vanishes and the value is
    # -t^2/2 + t(v1 - v2), unbounded below for any fixed multipliers
    S = standardize(example_51)
    v = np.array([0.4, 0.1])
    for t in (1.0, 3.0, 10.0):
        y = np.array([-t, t, -t, t])
        val = lagrangian(S, y, [0.0, 0.0, 2.5], v)
        assert val == pytest.approx(-0.5 * t * t + t * (v[0] - v[1]), rel=1e-12, abs=1e-9)


def test_lagrangian_zero_multipliers_is_objective(example_51):
    S = standardize(example_51)
    y = np.array([0.3, 0.4, 1.0, 2.0])
    assert lagrangian(S, y, np.zeros(3), np.zeros(2)) == pytest.approx(evaluate(S.fbar[0], y))


def test_lagrangian_complementary_point_recovers_objective(cdt_remark):
    # at the global point (0, 1) with u = (2, 0, 0): f1 = 0, so L = f0
    S = standardize(cdt_remark)
    x = np.array([0.0, 1.0])
    s = S.slack(x)
    y = np.concatenate([s, x])
    val = lagrangian(S, y, [2.0, 0.0, 0.0], np.zeros(1))
    assert val == pytest.approx(evaluate(cdt_remark.f0(), x))


def test_is_feasible_examples(example_51, cdt_remark):
    assert is_feasible(example_51, [0.0, 0.0])
    assert is_feasible(cdt_remark, [0.0, 1.0])
    assert not is_feasible(cdt_remark, [-0.5, 0.0])
    tol = 1e-8
    r = 1.0 + 2.0 * tol
    assert not is_feasible(cdt_remark, [0.0, r], tol=tol)


def test_multipliers_validation():
    Multipliers(np.zeros(3), np.array([-1.0]))  # negative v is allowed
    with pytest.raises(ValueError):
        Multipliers(np.array([-0.1, 0.0, 0.0]), np.zeros(1))
    with pytest.raises(DimensionMismatch):
        Multipliers(np.zeros(2), np.zeros(1))


def test_dimension_mismatch_on_evaluate():
    q = QuadFunc(np.eye(2), np.zeros(2), 0.0)
    with pytest.raises(DimensionMismatch):
        evaluate(q, np.zeros(3))
