"""Stationary signal generation, covariance estimates, and penalty terms."""

import numpy as np
import pytest

from graphjoint.signals import (FilterSpec, distance_matrix, gaussian_edge_weights,
                                generate_stationary_signals, pairwise_similarity_penalty,
                                polynomial_filter, random_filter, sample_covariance,
                                smoothness_penalty, sparsity_penalty,
                                stationarity_penalty)

from conftest import random_hollow_graph


# ---------------------------------------------------------------------------
# Filters and signal generation
# ---------------------------------------------------------------------------

def test_filter_spec_rejects_all_zero():
    with pytest.raises(ValueError):
        FilterSpec(coefficients=(0.0, 0.0))


def test_polynomial_filter_identity_coefficients():
    S = random_hollow_graph(np.random.default_rng(0), 5)
    assert np.array_equal(polynomial_filter(S, FilterSpec((1.0,))), np.eye(5))


def test_polynomial_filter_zero_graph_keeps_constant_term():
    H = polynomial_filter(np.zeros((4, 4)), FilterSpec((0.7, 0.4)))
    assert np.array_equal(H, 0.7 * np.eye(4))


def test_polynomial_filter_matches_power_sum():
    rng = np.random.default_rng(1)
    S = random_hollow_graph(rng, 6)
    h = (0.5, -0.3, 0.2, 0.1)
    H = polynomial_filter(S, FilterSpec(h))
    expected = h[0] * np.eye(6) + h[1] * S + h[2] * S @ S + h[3] * S @ S @ S
    assert np.allclose(H, expected, atol=1e-12)


def test_identity_filter_reproduces_noise():
    S = random_hollow_graph(np.random.default_rng(2), 5)
    X = generate_stationary_signals(S, FilterSpec((1.0,)), 7,
                                    np.random.default_rng(123))
    E = np.random.default_rng(123).standard_normal((5, 7))
    assert np.array_equal(X, E)


def test_zero_graph_scales_noise_by_constant_term():
    X = generate_stationary_signals(np.zeros((4, 4)), FilterSpec((0.7, 0.4)), 6,
                                    np.random.default_rng(5))
    E = np.random.default_rng(5).standard_normal((4, 6))
    assert np.allclose(X, 0.7 * E, atol=1e-15)


def test_population_covariance_commutes_with_graph():
    rng = np.random.default_rng(3)
    for _ in range(5):
        S = random_hollow_graph(rng, 8)
        H = polynomial_filter(S, random_filter(S, rng))
        C = H @ H
        denom = np.linalg.norm(C) * np.linalg.norm(S)
        assert np.linalg.norm(S @ C - C @ S) <= 1e-10 * denom


def test_random_filter_conditioning_recipe():
    # Unit spectral norm after rescaling, smallest singular value kept away
    # from zero, deterministic given the generator seed.
    rng = np.random.default_rng(4)
    for _ in range(10):
        S = random_hollow_graph(rng, 7)
        H = polynomial_filter(S, random_filter(S, rng, order=3))
        sv = np.linalg.svd(H, compute_uv=False)
        assert sv[0] == pytest.approx(1.0, rel=1e-9)
        assert sv[-1] >= 0.1 - 1e-9
    S = random_hollow_graph(np.random.default_rng(6), 6)
    a = random_filter(S, np.random.default_rng(77))
    b = random_filter(S, np.random.default_rng(77))
    assert a.coefficients == b.coefficients


# ---------------------------------------------------------------------------
# Covariance and distances
# ---------------------------------------------------------------------------

def test_sample_covariance_zero_signals():
    assert np.array_equal(sample_covariance(np.zeros((4, 3))), np.zeros((4, 4)))


def test_sample_covariance_single_signal():
    x = np.array([[1.0], [2.0], [-1.0]])
    assert np.allclose(sample_covariance(x), x @ x.T, atol=1e-15)


def test_sample_covariance_symmetric_psd():
    rng = np.random.default_rng(7)
    X = rng.standard_normal((6, 40))
    C = sample_covariance(X)
    assert np.array_equal(C, C.T)
    assert np.linalg.eigvalsh(C).min() >= -1e-12


def test_distance_matrix_small_example():
    X = np.array([[0.0], [np.sqrt(2.0)]])
    Z = distance_matrix(X)
    assert Z[0, 1] == pytest.approx(2.0)
    assert Z[0, 0] == 0.0 and Z[1, 1] == 0.0
    assert np.array_equal(Z, Z.T)


def test_distance_matrix_nonnegative_hollow():
    rng = np.random.default_rng(8)
    Z = distance_matrix(rng.standard_normal((7, 4)))
    assert Z.min() >= 0.0
    assert np.all(np.diagonal(Z) == 0.0)


# ---------------------------------------------------------------------------
# Penalties
# ---------------------------------------------------------------------------

def test_stationarity_penalty_commuting_inputs():
    S = random_hollow_graph(np.random.default_rng(9), 6)
    assert stationarity_penalty(S, np.eye(6)) == 0.0
    assert stationarity_penalty(S, S) == 0.0


def test_stationarity_penalty_matches_dense_commutator():
    rng = np.random.default_rng(10)
    S = random_hollow_graph(rng, 5)
    C = rng.standard_normal((5, 5))
    C = 0.5 * (C + C.T)
    expected = float(np.linalg.norm(S @ C - C @ S, "fro") ** 2)
    assert stationarity_penalty(S, C) == pytest.approx(expected, rel=1e-12)


def test_stationarity_penalty_rejects_mismatch():
    with pytest.raises(ValueError):
        stationarity_penalty(np.zeros((3, 3)), np.eye(4))


def test_smoothness_penalty_examples():
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    X = np.array([[0.0], [1.0]])
    assert smoothness_penalty(S, X) == pytest.approx(2.0)
    assert smoothness_penalty(np.zeros((2, 2)), X) == 0.0
    const = np.ones((4, 3))
    S4 = random_hollow_graph(np.random.default_rng(11), 4)
    assert smoothness_penalty(S4, const) == pytest.approx(0.0, abs=1e-15)


def test_sparsity_penalty_counts_both_triangles():
    complete3 = np.ones((3, 3)) - np.eye(3)
    assert sparsity_penalty([complete3]) == pytest.approx(6.0)
    two_edges = np.zeros((4, 4))
    two_edges[0, 1] = two_edges[1, 0] = 1.0
    two_edges[2, 3] = two_edges[3, 2] = 1.0
    three_edges = np.zeros((4, 4))
    for i, j in [(0, 1), (0, 2), (1, 3)]:
        three_edges[i, j] = three_edges[j, i] = 1.0
    assert sparsity_penalty([two_edges, three_edges]) == pytest.approx(10.0)
    assert sparsity_penalty([np.zeros((5, 5))]) == 0.0


def test_pairwise_similarity_penalty_examples():
    A = np.zeros((2, 2))
    B = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert pairwise_similarity_penalty([B, B]) == 0.0
    assert pairwise_similarity_penalty([A, B]) == pytest.approx(2.0)


def test_pairwise_similarity_penalty_three_graphs_direct():
    rng = np.random.default_rng(12)
    graphs = [random_hollow_graph(rng, 5) for _ in range(3)]
    expected = sum(np.abs(graphs[k] - graphs[l]).sum()
                   for k in range(3) for l in range(k + 1, 3))
    assert pairwise_similarity_penalty(graphs) == pytest.approx(expected)


def test_pairwise_similarity_penalty_rejects_size_mismatch():
    with pytest.raises(ValueError):
        pairwise_similarity_penalty([np.zeros((3, 3)), np.zeros((4, 4))])


def test_penalties_invariant_under_relabeling():
    rng = np.random.default_rng(13)
    S = random_hollow_graph(rng, 6)
    X = rng.standard_normal((6, 5))
    C = sample_covariance(X)
    perm = rng.permutation(6)
    P = np.eye(6)[perm]
    S2, X2, C2 = P @ S @ P.T, P @ X, P @ C @ P.T
    assert stationarity_penalty(S2, C2) == pytest.approx(
        stationarity_penalty(S, C), rel=1e-10)
    assert smoothness_penalty(S2, X2) == pytest.approx(
        smoothness_penalty(S, X), rel=1e-10)
    assert sparsity_penalty([S2]) == pytest.approx(sparsity_penalty([S]))


def test_stationarity_penalty_shrinks_with_more_signals():
    # Averaged over seeds, the sample covariance commutes better with the
    # true graph as the signal count grows.
    counts = (100, 1000, 10000)
    sums = {r: 0.0 for r in counts}
    for seed in range(10):
        rng = np.random.default_rng(seed)
        S = random_hollow_graph(rng, 10, p=0.3)
        H = polynomial_filter(S, random_filter(S, rng))
        E = rng.standard_normal((10, max(counts)))
        X = H @ E
        for r in counts:
            sums[r] += stationarity_penalty(S, sample_covariance(X[:, :r]))
    assert sums[100] > sums[1000] > sums[10000]


# ---------------------------------------------------------------------------
# Gaussian edge weights
# ---------------------------------------------------------------------------

def test_gaussian_weights_examples():
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    same = np.array([[1.0, 2.0], [1.0, 2.0]])
    assert gaussian_edge_weights(S, same, 1.0)[0, 1] == pytest.approx(1.0)
    apart = np.array([[0.0], [np.sqrt(2.0)]])  # squared distance 2
    assert gaussian_edge_weights(S, apart, 1.0)[0, 1] == pytest.approx(
        np.exp(-1.0), rel=1e-12)


def test_gaussian_weights_zero_off_edges_and_symmetric():
    rng = np.random.default_rng(14)
    S = random_hollow_graph(rng, 6, p=0.4)
    X = rng.standard_normal((6, 3))
    W = gaussian_edge_weights(S, X, 1.0)
    assert np.all(W[S == 0] == 0.0)
    assert np.array_equal(W, W.T)
    assert np.all(W[S == 1] > 0.0)


def test_gaussian_weights_huge_bandwidth_saturates():
    rng = np.random.default_rng(15)
    S = random_hollow_graph(rng, 5)
    X = rng.standard_normal((5, 3))
    sigma = 1e3 * np.sqrt(distance_matrix(X).max())
    W = gaussian_edge_weights(S, X, sigma)
    assert np.all(np.abs(W[S == 1] - 1.0) <= 1e-6)


def test_gaussian_weights_rejects_nonpositive_bandwidth():
    S = np.array([[0.0, 1.0], [1.0, 0.0]])
    X = np.zeros((2, 1))
    with pytest.raises(ValueError):
        gaussian_edge_weights(S, X, 0.0)
    with pytest.raises(ValueError):
        gaussian_edge_weights(S, X, -1.0)
