"""Stationary graph-signal synthesis, covariances, and objective penalties.

Signals are diffusions of white noise through a polynomial graph filter:

    X = H E,   H = sum_l h_l S^l,   E ~ N(0, I) elementwise,

so the population covariance H^2 is a polynomial in S and commutes with it.
Penalties implemented here are the data/regularity terms the solver and the
baselines optimize:

    stationarity   ||S C - C S||_F^2
    smoothness     ||S o Z||_1 with Z_ij = ||X_i - X_j||^2
    sparsity       sum_k ||vec(S^(k))||_1
    pairwise       sum_{k<k'} ||vec(S^(k) - S^(k'))||_1   (node-aligned graphs)

plus the Gaussian edge-weighting scheme that attaches weights
exp(-||X_i - X_j||^2 / (2 sigma^2)) to existing edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class FilterSpec:
    """Polynomial graph-filter coefficients h_0, ..., h_l."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        if not self.coefficients or not any(c != 0.0 for c in self.coefficients):
            raise ValueError("filter needs at least one nonzero coefficient")

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1


def polynomial_filter(S: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Dense filter matrix H = sum_l h_l S^l."""
    S = np.asarray(S, dtype=float)
    H = np.zeros_like(S)
    power = np.eye(S.shape[0])
    for h in spec.coefficients:
        H += h * power
        power = power @ S
    return H


def random_filter(S: np.ndarray, rng: np.random.Generator, order: int = 3,
                  min_rel_sv: float = 0.1) -> FilterSpec:
    """Random well-conditioned filter for a given graph.

    Coefficients are uniform on [-1, 1]; h_0 is then shifted so that after
    rescaling H to unit spectral norm its smallest singular value is at least
    `min_rel_sv`. Because H is a polynomial in the symmetric S, its spectrum
    is q(lambda_i) for the eigenvalues lambda_i of S, and shifting h_0 by c
    shifts every q(lambda_i) by c, which makes the conditioning fix a small
    closed-form computation.
    """
    S = np.asarray(S, dtype=float)
    h = rng.uniform(-1.0, 1.0, size=order + 1)
    lam = np.linalg.eigvalsh(S)
    q = np.polyval(h[::-1], lam)
    lo, hi = q.min(), q.max()
    # want min(q + c) >= min_rel_sv * max(q + c) with q + c > 0
    c = (min_rel_sv * hi - lo) / (1.0 - min_rel_sv)
    c = max(c, 0.0) + 1e-9
    h = h.copy()
    h[0] += c
    scale = np.abs(np.polyval(h[::-1], lam)).max()
    return FilterSpec(coefficients=tuple(h / scale))


def generate_stationary_signals(S: np.ndarray, spec: FilterSpec, r: int,
                                rng: np.random.Generator) -> np.ndarray:
    """N x r signal matrix X = H E with E standard normal."""
    if r < 1:
        raise ValueError(f"need r >= 1 signals, got {r}")
    H = polynomial_filter(S, spec)
    E = rng.standard_normal((S.shape[0], r))
    return H @ E


def sample_covariance(X: np.ndarray) -> np.ndarray:
    """C = X X' / r, symmetrized to scrub rounding asymmetry."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("signal matrix must be N x r with r >= 1")
    C = X @ X.T / X.shape[1]
    return 0.5 * (C + C.T)


def distance_matrix(X: np.ndarray) -> np.ndarray:
    """Z_ij = ||X_i - X_j||^2 over signal rows; symmetric, hollow."""
    X = np.asarray(X, dtype=float)
    sq = np.sum(X ** 2, axis=1)
    Z = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(Z, 0.0)
    return np.maximum(0.5 * (Z + Z.T), 0.0)


def stationarity_penalty(S: np.ndarray, C: np.ndarray) -> float:
    """||S C - C S||_F^2."""
    S = np.asarray(S, dtype=float)
    C = np.asarray(C, dtype=float)
    if S.shape != C.shape:
        raise ValueError(f"shape mismatch: S {S.shape} vs C {C.shape}")
    comm = S @ C - C @ S
    return float(np.sum(comm ** 2))


def smoothness_penalty(S: np.ndarray, X: np.ndarray) -> float:
    """||S o Z||_1 with Z the squared-distance matrix of the signal rows."""
    S = np.asarray(S, dtype=float)
    Z = distance_matrix(X)
    if S.shape != Z.shape:
        raise ValueError(f"shape mismatch: S {S.shape} vs X rows {Z.shape[0]}")
    return float(np.sum(np.abs(S * Z)))


def sparsity_penalty(graphs: list[np.ndarray]) -> float:
    """sum_k ||vec(S^(k))||_1 (both triangles counted)."""
    return float(sum(np.sum(np.abs(np.asarray(S))) for S in graphs))


def pairwise_similarity_penalty(graphs: list[np.ndarray]) -> float:
    """sum_{k<k'} ||vec(S^(k) - S^(k'))||_1 for node-aligned graphs."""
    mats = [np.asarray(S, dtype=float) for S in graphs]
    sizes = {S.shape for S in mats}
    if len(sizes) > 1:
        raise ValueError(f"pairwise penalty needs equal-size graphs, got sizes {sorted(sizes)}")
    total = 0.0
    for k in range(len(mats)):
        for kk in range(k + 1, len(mats)):
            total += float(np.sum(np.abs(mats[k] - mats[kk])))
    return total


def gaussian_edge_weights(S: np.ndarray, X: np.ndarray, sigma: float) -> np.ndarray:
    """Gaussian kernel weights on existing edges: exp(-Z_ij / (2 sigma^2)).

    Non-edges stay exactly zero; the result is symmetric.
    """
    if sigma <= 0:
        raise ValueError(f"kernel width must be positive, got {sigma}")
    S = np.asarray(S, dtype=float)
    Z = distance_matrix(X)
    if S.shape != Z.shape:
        raise ValueError(f"shape mismatch: S {S.shape} vs X rows {Z.shape[0]}")
    weights = np.exp(-Z / (2.0 * sigma ** 2))
    return np.where(S != 0, weights, 0.0)
