import numpy as np
import pytest

from coprelax import matcore
from coprelax.errors import DimensionMismatch
from coprelax.model import QuadFunc


def random_symmetric(rng, n, scale=1.0):
    A = rng.standard_normal((n, n)) * scale
    return 0.5 * (A + A.T)


def test_eig_diagonal():
    dec = matcore.eig(np.diag([2.0, -2.0]))
    assert np.allclose(dec.values, [-2.0, 2.0])


def test_eig_identity():
    dec = matcore.eig(np.eye(3))
    assert np.allclose(dec.values, [1.0, 1.0, 1.0])
    assert np.allclose(dec.vectors.T @ dec.vectors, np.eye(3), atol=1e-12)


def test_eig_indefinite_example_matrix():
    # det = -1/2 forces a negative eigenvalue
    dec = matcore.eig(np.array([[0.5, 1.0], [1.0, 1.0]]))
    assert dec.lambda_min < 0


def test_eig_reconstruction_and_orthonormality_random():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        n = int(rng.integers(1, 13))
        M = random_symmetric(rng, n, scale=float(rng.uniform(0.1, 10.0)))
        dec = matcore.eig(M)
        tol = 1e-10 * (1.0 + np.linalg.norm(M))
        assert np.linalg.norm(dec.vectors @ np.diag(dec.values) @ dec.vectors.T - M) <= tol
        assert np.linalg.norm(dec.vectors.T @ dec.vectors - np.eye(n)) <= 1e-10
        assert np.all(np.diff(dec.values) >= -1e-12)


def test_pinv_identity():
    assert np.allclose(matcore.pinv(np.eye(4)), np.eye(4))


def test_pinv_singular_diagonal():
    assert np.allclose(matcore.pinv(np.diag([4.0, 0.0])), np.diag([0.25, 0.0]))


def test_pinv_rank_one_projector():
    rng = np.random.default_rng(7)
    v = rng.standard_normal(5)
    v /= np.linalg.norm(v)
    M = np.outer(v, v)
    Mp = matcore.pinv(M)
    assert np.allclose(Mp, M, atol=1e-10)
    assert np.linalg.norm(M @ Mp @ M - M) <= 1e-8


def test_pinv_properties_random():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 9))
        M = random_symmetric(rng, n)
        if rng.uniform() < 0.5 and n > 1:
            # force rank deficiency
            dec = matcore.eig(M)
            vals = dec.values.copy()
            vals[: n // 2 + 1] = 0.0
            M = dec.vectors @ np.diag(vals) @ dec.vectors.T
        Mp = matcore.pinv(M)
        assert np.linalg.norm(M @ Mp @ M - M) <= 1e-8
        assert np.linalg.norm(Mp @ M @ Mp - Mp) <= 1e-8
        assert np.linalg.norm(M @ Mp - (M @ Mp).T) <= 1e-8


def test_is_psd_zero_matrix():
    assert matcore.is_psd(np.zeros((3, 3)))


def test_is_psd_rejects_indefinite():
    assert not matcore.is_psd(np.array([[0.5, 1.0], [1.0, 1.0]]))


def test_is_psd_accepts_singular_psd():
    assert matcore.is_psd(np.diag([4.0, 0.0]))


def test_is_psd_matches_sampling():
    rng = np.random.default_rng(13)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        M = random_symmetric(rng, n)
        verdict = matcore.is_psd(M, tol=1e-9)
        V = rng.standard_normal((10_000, n))
        V /= np.linalg.norm(V, axis=1, keepdims=True)
        sampled_min = float(np.min(np.einsum("ij,jk,ik->i", V, M, V)))
        if verdict:
            assert sampled_min >= -10 * 1e-9
        # one-sided check only: eig is authoritative for the negative case


def test_shor_matrix_basic():
    q = QuadFunc(np.array([[1.0]]), np.zeros(1), 0.0)
    assert np.array_equal(matcore.shor_matrix(q), np.array([[0.0, 0.0], [0.0, 1.0]]))


def test_shor_matrix_constraint_layout():
    q1 = np.array([0.3, -0.7])
    Q1 = np.array([[2.0, 0.5], [0.5, 1.0]])
    q = QuadFunc(Q1, -q1, -1.0)  # x^T Q1 x + 2 q1^T x - 1
    M = matcore.shor_matrix(q)
    assert M[0, 0] == -1.0
    assert np.array_equal(M[0, 1:], q1)
    assert np.array_equal(M[1:, 1:], Q1)


def test_shor_matrix_psd_iff_nonnegative_quadratic():
    rng = np.random.default_rng(5)
    for _ in range(3):
        n = int(rng.integers(1, 4))
        L = rng.standard_normal((n, n))
        H = L @ L.T + 0.3 * np.eye(n)
        xstar = rng.standard_normal(n)
        # q(x) = (x - xstar)^T H (x - xstar) >= 0 with interior minimum 0
        q = QuadFunc(H, H @ xstar, float(xstar @ H @ xstar))
        assert matcore.is_psd(matcore.shor_matrix(q), tol=1e-9)
        # shifting the minimum value below zero breaks psd-ness
        q_neg = QuadFunc(H, H @ xstar, float(xstar @ H @ xstar) - 0.5)
        assert not matcore.is_psd(matcore.shor_matrix(q_neg), tol=1e-9)


def test_jay():
    assert np.array_equal(matcore.jay(3), np.array([[1.0, 0, 0], [0, 0, 0], [0, 0, 0]]))


def test_direct_sum_identity_with_jay():
    n = 4
    assert np.array_equal(matcore.direct_sum(np.array([[1.0]]), np.zeros((n, n))), matcore.jay(n + 1))


def test_direct_sum_padding():
    Q0 = np.array([[1.0, 2.0], [2.0, 3.0]])
    out = matcore.direct_sum(np.zeros((2, 2)), Q0)
    assert out.shape == (4, 4)
    assert np.array_equal(out[2:, 2:], Q0)
    assert np.all(out[:2, :] == 0)


def test_symmetrize_rejects_asymmetric():
    with pytest.raises(DimensionMismatch):
        matcore.symmetrize(np.array([[0.0, 1.0], [0.0, 0.0]]))
