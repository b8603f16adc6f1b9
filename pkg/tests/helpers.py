"""Shared numerical oracles for the test-suite (sampling-based, independent
of the library's own decision procedures)."""

import numpy as np


def cone_slice_min_sampled(M, k, m, rng, samples=100_000, polish_starts=50, polish_iters=400):
    """Approximate min of v^T M v over the unit slice of R^k_+ x R^m by
    dense random sampling plus projected-gradient polish."""
    M = np.asarray(M, dtype=float)
    n = k + m
    V = rng.standard_normal((samples, n))
    if k:
        V[:, :k] = np.abs(V[:, :k])
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    vals = np.einsum("ij,jk,ik->i", V, M, V)
    order = np.argsort(vals)
    best = float(vals[order[0]])
    lam = float(np.max(np.abs(np.linalg.eigvalsh(M)))) or 1.0
    step = 0.5 / lam
    for idx in order[:polish_starts]:
        x = V[idx].copy()
        for _ in range(polish_iters):
            g = M @ x
            x = x - step * (g - (x @ g) * x)
            if k:
                x[:k] = np.maximum(x[:k], 0.0)
            nrm = np.linalg.norm(x)
            if nrm < 1e-12:
                break
            x /= nrm
        val = float(x @ M @ x)
        if val < best:
            best = val
    return best


def random_unit_cone_points(rng, k, m, count):
    V = rng.standard_normal((count, k + m))
    if k:
        V[:, :k] = np.abs(V[:, :k])
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return V
