"""Graphon models, latent/graph sampling, and block-histogram estimation.

A graphon W: [0,1]^2 -> [0,1] is symmetric; graphs are sampled by drawing
latent points zeta_i uniformly and connecting i, j with probability
W(zeta_i, zeta_j). Supported families:

    constant(p)          W(x, y) = p
    half-sum-squares     W(x, y) = (x^2 + y^2) / 2
    gaussian-bump(beta)  W(x, y) = 0.25 + 0.75 exp(-beta (x-1/2)^2 (y-1/2)^2)
    table(entries)       piecewise-constant on a G x G grid

The block histogram T = F S F with F = f/(N-f) (I kron (11' - I)) gives a
crude probability-matrix estimate from a single adjacency matrix; entries are
clamped into [eps, 1-eps] so downstream Bernoulli likelihoods stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

DEFAULT_EPS = 1e-3

_KINDS = ("constant", "half-sum-squares", "gaussian-bump", "table")


@dataclass(frozen=True)
class GraphonSpec:
    """A graphon family tag plus its parameters; serializable to config."""

    kind: str
    p: float | None = None
    beta: float | None = None
    table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown graphon kind {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "constant":
            if self.p is None or not (0.0 <= self.p <= 1.0):
                raise ValueError("constant graphon needs p in [0,1]")
        elif self.kind == "gaussian-bump":
            if self.beta is None or self.beta <= 0:
                raise ValueError("gaussian-bump graphon needs beta > 0")
        elif self.kind == "table":
            tab = np.asarray(self.table, dtype=float)
            if tab.ndim != 2 or tab.shape[0] != tab.shape[1]:
                raise ValueError("table graphon needs a square matrix")
            if not np.array_equal(tab, tab.T):
                raise ValueError("table graphon must be symmetric")
            if tab.min() < 0.0 or tab.max() > 1.0:
                raise ValueError("table graphon entries must lie in [0,1]")
            object.__setattr__(self, "table", tab)

    def to_config(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "constant":
            out["p"] = self.p
        elif self.kind == "gaussian-bump":
            out["beta"] = self.beta
        elif self.kind == "table":
            out["table"] = [list(map(float, row)) for row in self.table]
        return out

    @classmethod
    def from_config(cls, cfg: dict[str, Any]) -> "GraphonSpec":
        kind = cfg.get("kind")
        if kind == "constant":
            return cls(kind="constant", p=float(cfg["p"]))
        if kind == "half-sum-squares":
            return cls(kind="half-sum-squares")
        if kind == "gaussian-bump":
            return cls(kind="gaussian-bump", beta=float(cfg["beta"]))
        if kind == "table":
            return cls(kind="table", table=np.asarray(cfg["table"], dtype=float))
        raise ValueError(f"unknown graphon kind {kind!r} in config")


def eval_graphon(spec: GraphonSpec, x, y):
    """Evaluate W(x, y) for coordinates in [0,1]; vectorized over arrays."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x < 0) or np.any(x > 1) or np.any(y < 0) or np.any(y > 1):
        raise ValueError("graphon coordinates must lie in [0,1]")
    if spec.kind == "constant":
        out = np.full(np.broadcast(x, y).shape, spec.p, dtype=float)
    elif spec.kind == "half-sum-squares":
        out = 0.5 * (x ** 2 + y ** 2)
    elif spec.kind == "gaussian-bump":
        # multiply the squared offsets first so the value is exactly
        # symmetric in (x, y) down to the last bit
        out = 0.25 + 0.75 * np.exp(-spec.beta * ((x - 0.5) ** 2 * (y - 0.5) ** 2))
    else:  # table
        G = spec.table.shape[0]
        a = np.minimum(np.floor(x * G).astype(int), G - 1)
        b = np.minimum(np.floor(y * G).astype(int), G - 1)
        out = spec.table[a, b]
    if out.ndim == 0:
        return float(out)
    return out


def grid_graphon(spec: GraphonSpec, G: int) -> np.ndarray:
    """G x G discretization of the graphon at grid-cell midpoints."""
    mid = (np.arange(G) + 0.5) / G
    return np.asarray(eval_graphon(spec, mid[:, None], mid[None, :]))


def sample_latent(n: int, rng: np.random.Generator,
                  low: float = 0.0, high: float = 1.0) -> np.ndarray:
    """Draw n latent points uniformly from [low, high] inside [0,1]."""
    if n < 1:
        raise ValueError(f"need n >= 1 latent points, got {n}")
    if not (0.0 <= low <= high <= 1.0):
        raise ValueError(f"latent range [{low}, {high}] must be a nonempty subinterval of [0,1]")
    if low == high:
        return np.full(n, low)
    return rng.uniform(low, high, size=n)


def latent_to_grid(zeta: np.ndarray, G: int) -> np.ndarray:
    """Map latent points to 1-based grid cells: z_i = min(G, floor(zeta_i G) + 1)."""
    zeta = np.asarray(zeta, dtype=float)
    if np.any(zeta < 0) or np.any(zeta > 1):
        raise ValueError("latent points must lie in [0,1]")
    if G < 1:
        raise ValueError(f"grid size must be >= 1, got {G}")
    return np.minimum(G, np.floor(zeta * G).astype(np.int64) + 1)


def sample_graph(spec: GraphonSpec, zeta: np.ndarray,
                 rng: np.random.Generator) -> np.ndarray:
    """Sample a symmetric hollow binary adjacency matrix from the graphon.

    Each unordered pair is drawn once: S_ij = S_ji ~ Bernoulli(W(zeta_i, zeta_j)).
    """
    zeta = np.asarray(zeta, dtype=float)
    n = zeta.size
    probs = np.asarray(eval_graphon(spec, zeta[:, None], zeta[None, :]))
    iu, ju = np.triu_indices(n, 1)
    draws = (rng.random(iu.size) < probs[iu, ju]).astype(float)
    S = np.zeros((n, n))
    S[iu, ju] = draws
    S[ju, iu] = draws
    return S


# ---------------------------------------------------------------------------
# Block histogram
# ---------------------------------------------------------------------------

def default_block_size(N: int) -> int:
    """Largest divisor f of N with 2 <= f <= floor(sqrt(N))."""
    cap = math.isqrt(N)
    for f in range(cap, 1, -1):
        if N % f == 0:
            return f
    raise ValueError(
        f"N={N} has no divisor in [2, floor(sqrt(N))]; pass an explicit block size")


def build_block_averager(N: int, f: int, normalization: str = "paper") -> np.ndarray:
    """Block averager F = f/(N-f) (I_{N/f} kron (11' - I_f)).

    normalization="mean" replaces the f/(N-f) coefficient with 1/f (a true
    within-block mean); the default keeps the printed constant.
    """
    if f < 2:
        raise ValueError(f"block size must be >= 2, got {f} (f=1 zeroes the map)")
    if N % f != 0:
        raise ValueError(f"block size {f} must divide N={N}")
    if normalization == "paper":
        coeff = f / (N - f)
    elif normalization == "mean":
        coeff = 1.0 / f
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    block = np.ones((f, f)) - np.eye(f)
    return coeff * np.kron(np.eye(N // f), block)


def histogram_estimate(S: np.ndarray, f: int, eps: float = DEFAULT_EPS,
                       normalization: str = "paper") -> np.ndarray:
    """Probability-matrix estimate clamp(F S F) with entries in [eps, 1-eps]."""
    S = np.asarray(S, dtype=float)
    F = build_block_averager(S.shape[0], f, normalization=normalization)
    T = F @ S @ F
    T = 0.5 * (T + T.T)  # exact symmetry for downstream symmetric consumers
    return np.clip(T, eps, 1.0 - eps)
