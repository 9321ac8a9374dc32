"""Operator self-validation: sparse assemblies vs direct dense evaluation.

Each check evaluates one operator identity two ways — through the assembled
sparse operator and through a from-scratch dense computation on matrices —
and reports the worst relative deviation over randomized instances. This is
the engine behind the `validate-ops` CLI subcommand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphons import build_block_averager, default_block_size
from .operators import assemble_bundle, graphon_unvec, tri_pairs, tri_vec

TOLERANCE = 1e-10


@dataclass
class CheckResult:
    name: str
    worst: float
    tolerance: float = TOLERANCE

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}  {self.name:<12} max rel dev {self.worst:.3e} "
                f"(tol {self.tolerance:g})")


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-30)


def _rel_vec(a: np.ndarray, b: np.ndarray) -> float:
    denom = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-30)
    return float(np.linalg.norm(a - b)) / denom


def _difference_dense(G: int) -> tuple[np.ndarray, np.ndarray]:
    D1 = np.zeros((G, G - 1))
    for a in range(G - 1):
        D1[a, a], D1[a + 1, a] = -1.0, 1.0
    D2 = np.zeros((G, G - 2))
    for a in range(G - 2):
        D2[a, a], D2[a + 1, a], D2[a + 2, a] = 1.0, -2.0, 1.0
    return D1, D2


def _random_instance(rng: np.random.Generator):
    """Random sizes (even, so block averagers exist), covariances, graphs."""
    K = int(rng.integers(1, 4))
    sizes = [2 * int(rng.integers(2, 6)) for _ in range(K)]
    if rng.random() < 0.5:  # equal sizes so the segment-mean map exists
        sizes = [sizes[0]] * K
    G = int(rng.integers(3, 21))
    covs, avgs, assigns, graphs = [], [], [], []
    for n in sizes:
        A = rng.normal(size=(n, n))
        covs.append(A @ A.T / n)
        avgs.append(build_block_averager(n, default_block_size(n)))
        assigns.append(rng.integers(1, G + 1, size=n))
        upper = np.triu((rng.random((n, n)) < 0.4).astype(float), 1)
        graphs.append(upper + upper.T)
    return sizes, G, covs, avgs, assigns, graphs


def run_operator_checks(seed: int = 0, instances: int = 50) -> list[CheckResult]:
    """Compare every assembled operator against dense evaluation."""
    rng = np.random.default_rng(seed)
    worst = {"commutator": 0.0, "histogram": 0.0, "selector": 0.0,
             "smoothness": 0.0, "mean": 0.0}

    for _ in range(instances):
        sizes, G, covs, avgs, assigns, graphs = _random_instance(rng)
        bundle = assemble_bundle(covs, avgs, assigns, G)
        s = np.concatenate([tri_vec(S) for S in graphs])

        lhs = float(np.sum((bundle.M @ s) ** 2))
        rhs = sum(float(np.linalg.norm(S @ C - C @ S) ** 2)
                  for S, C in zip(graphs, covs))
        worst["commutator"] = max(worst["commutator"], _rel(lhs, rhs))

        dense_hist = []
        for F, S, n in zip(avgs, graphs, sizes):
            T = F @ S @ F
            i, j = tri_pairs(n)
            dense_hist.append(T[i, j])
        worst["histogram"] = max(worst["histogram"],
                                 _rel_vec(bundle.Psi @ s,
                                          np.concatenate(dense_hist)))

        w = rng.random(bundle.J)
        W = graphon_unvec(w, G)
        direct = []
        for z, n in zip(assigns, sizes):
            i, j = tri_pairs(n)
            direct.append(W[z[i] - 1, z[j] - 1])
        worst["selector"] = max(worst["selector"],
                                _rel_vec(bundle.sigma @ w,
                                         np.concatenate(direct)))

        D1, D2 = _difference_dense(G)
        lhs = float(np.sum((bundle.Phi @ w) ** 2))
        rhs = (np.linalg.norm(D2.T @ W) ** 2
               + np.linalg.norm(D1.T @ W @ D1) ** 2
               + np.linalg.norm(W @ D2) ** 2)
        worst["smoothness"] = max(worst["smoothness"], _rel(lhs, float(rhs)))

        if bundle.R is not None:
            mean = np.mean(np.stack(bundle.segments(s)), axis=0)
            worst["mean"] = max(worst["mean"], _rel_vec(bundle.R @ s, mean))

    return [CheckResult(name, dev) for name, dev in sorted(worst.items())]
