"""Scalar likelihood prox (projected gradient) and the entropy prox (DCA)."""

import numpy as np
import pytest

from graphjoint.prox import (bernoulli_nll, bernoulli_nll_grad_s,
                             bernoulli_nll_grad_t, gamma_logit, likelihood_prox,
                             scalar_likelihood_prox, shared_probability_prox)

EPS = 0.05


def exact_grid(eps: float, step: float = 1e-4) -> np.ndarray:
    """Uniform grid over [eps, 1-eps] that contains both endpoints exactly."""
    return np.linspace(eps, 1.0 - eps, round((1.0 - 2.0 * eps) / step) + 1)


def prox_objective(s, t, c, d):
    return (-(s * np.log(t) + (1.0 - s) * np.log1p(-t))
            + 0.5 * c * (t - d) ** 2)


def entropy_objective(t, K, c, d):
    return (-K * (t * np.log(t) + (1.0 - t) * np.log1p(-t))
            + 0.5 * c * (t - d) ** 2)


# ---------------------------------------------------------------------------
# Logit and negative log-likelihood primitives
# ---------------------------------------------------------------------------

def test_gamma_logit_values():
    t = np.array([0.5, 0.25, 0.75])
    expected = np.log(t) - np.log1p(-t)
    assert np.allclose(gamma_logit(t), expected, atol=1e-15)
    assert gamma_logit(np.array([0.5]))[0] == 0.0


def test_gamma_logit_rejects_boundary():
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            gamma_logit(np.array([bad]))


def test_bernoulli_nll_values_and_errors():
    assert bernoulli_nll(np.array([1.0]), np.array([0.5])) == pytest.approx(np.log(2.0))
    assert bernoulli_nll(np.array([0.0, 1.0]), np.array([0.5, 0.5])) == pytest.approx(
        2 * np.log(2.0))
    with pytest.raises(ValueError):
        bernoulli_nll(np.array([1.0, 0.0]), np.array([0.5]))
    with pytest.raises(ValueError):
        bernoulli_nll(np.array([1.0]), np.array([1.0]))


def test_nll_gradients_match_finite_differences():
    rng = np.random.default_rng(0)
    h = 1e-6
    t = rng.uniform(EPS + 2 * h, 1 - EPS - 2 * h, size=20)
    s = rng.random(20)
    grad_t = bernoulli_nll_grad_t(s, t)
    grad_s = bernoulli_nll_grad_s(t)
    for i in range(t.size):
        tp, tm = t.copy(), t.copy()
        tp[i] += h
        tm[i] -= h
        fd_t = (bernoulli_nll(s, tp) - bernoulli_nll(s, tm)) / (2 * h)
        assert grad_t[i] == pytest.approx(fd_t, rel=1e-5)
        sp, sm = s.copy(), s.copy()
        sp[i] += h
        sm[i] -= h
        fd_s = (bernoulli_nll(sp, t) - bernoulli_nll(sm, t)) / (2 * h)
        assert grad_s[i] == pytest.approx(fd_s, rel=1e-5)
    # the logit is the negated s-gradient
    assert np.allclose(gamma_logit(t), -grad_s, atol=1e-12)


# ---------------------------------------------------------------------------
# Scalar likelihood prox (projected gradient)
# ---------------------------------------------------------------------------

def test_scalar_prox_symmetric_midpoint():
    assert scalar_likelihood_prox(0.5, 2.0, 0.5, EPS) == pytest.approx(0.5, abs=1e-8)


def test_scalar_prox_binary_targets_hit_box_edges():
    assert scalar_likelihood_prox(1.0, 2.0, 0.5, EPS) == pytest.approx(1.0 - EPS,
                                                                       abs=1e-8)
    assert scalar_likelihood_prox(0.0, 2.0, 0.5, EPS) == pytest.approx(EPS, abs=1e-8)


def test_scalar_prox_huge_weight_tracks_center():
    for d in (0.2, 0.5, 0.8):
        t = scalar_likelihood_prox(1.0, 1e8, d, EPS)
        assert t == pytest.approx(np.clip(d, EPS, 1 - EPS), abs=1e-4)


def test_scalar_prox_rejects_invalid_inputs():
    with pytest.raises(ValueError):
        scalar_likelihood_prox(-0.1, 2.0, 0.5, EPS)
    with pytest.raises(ValueError):
        scalar_likelihood_prox(1.1, 2.0, 0.5, EPS)
    with pytest.raises(ValueError):
        scalar_likelihood_prox(1.0, 0.0, 0.5, EPS)


def test_scalar_prox_matches_grid_search():
    rng = np.random.default_rng(1)
    grid = exact_grid(EPS)
    for _ in range(200):
        s_i = float(rng.integers(0, 2))
        c = float(10.0 ** rng.uniform(-1, 3))
        d = float(rng.uniform(0, 1))
        t = scalar_likelihood_prox(s_i, c, d, EPS)
        t_grid = grid[int(np.argmin(prox_objective(s_i, grid, c, d)))]
        assert abs(t - t_grid) <= 1e-3


def test_vector_prox_stays_in_box_and_is_entrywise():
    rng = np.random.default_rng(2)
    s = rng.integers(0, 2, size=30).astype(float)
    d = rng.random(30)
    t = likelihood_prox(s, 3.0, d, EPS)
    assert t.min() >= EPS and t.max() <= 1 - EPS
    for i in rng.choice(30, size=5, replace=False):
        ti = scalar_likelihood_prox(float(s[i]), 3.0, float(d[i]), EPS)
        assert t[i] == pytest.approx(ti, abs=1e-6)


# ---------------------------------------------------------------------------
# Shared-probability prox (DCA on the entropy double well)
# ---------------------------------------------------------------------------

def as_scalar(x):
    return float(np.asarray(x).reshape(-1)[0])


def test_dca_huge_weight_tracks_center():
    for d in (0.15, 0.5, 0.85):
        t = as_scalar(shared_probability_prox(3, 1e9, d, EPS))
        assert t == pytest.approx(np.clip(d, EPS, 1 - EPS), abs=1e-4)


def test_dca_entropy_dominated_goes_to_near_boundary():
    t = as_scalar(shared_probability_prox(50, 1e-3, 0.3, EPS))
    assert t == pytest.approx(EPS, abs=1e-8)
    t_hi = as_scalar(shared_probability_prox(50, 1e-3, 0.7, EPS))
    assert t_hi == pytest.approx(1 - EPS, abs=1e-8)


def test_dca_symmetric_tie_breaks_low_with_equal_objectives():
    t = as_scalar(shared_probability_prox(3, 1.0, 0.5, EPS))
    assert t == pytest.approx(EPS, abs=1e-8)
    lo = entropy_objective(EPS, 3, 1.0, 0.5)
    hi = entropy_objective(1 - EPS, 3, 1.0, 0.5)
    assert abs(lo - hi) <= 1e-10


def test_dca_matches_grid_search():
    rng = np.random.default_rng(3)
    grid = exact_grid(EPS)
    for _ in range(200):
        K = int(rng.integers(1, 4))
        c = float(10.0 ** rng.uniform(-1, 3))
        d = float(rng.uniform(0, 1))
        t = as_scalar(shared_probability_prox(K, c, d, EPS))
        t_grid = grid[int(np.argmin(entropy_objective(grid, K, c, d)))]
        assert abs(t - t_grid) <= 1e-3


def test_dca_vectorized_centers():
    d = np.array([0.1, 0.5, 0.9])
    t = np.asarray(shared_probability_prox(2, 5.0, d, EPS))
    assert t.shape == d.shape
    for i in range(3):
        assert t[i] == pytest.approx(
            as_scalar(shared_probability_prox(2, 5.0, float(d[i]), EPS)), abs=1e-8)


def test_dca_rejects_invalid_inputs():
    with pytest.raises(ValueError):
        shared_probability_prox(0, 1.0, 0.5, EPS)
    with pytest.raises(ValueError):
        shared_probability_prox(2, -1.0, 0.5, EPS)
    with pytest.raises(ValueError):
        shared_probability_prox(2, 1.0, 0.5, 0.6)
