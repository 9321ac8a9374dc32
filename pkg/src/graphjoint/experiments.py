"""Experiment harness: synthetic sweeps, the robust noise sweep, senate runs.

Each sweep samples data per trial, runs every configured method, and returns
a flat list of trial records. Everything is reproducible bit-for-bit from the
base seed: data generators derive from (seed, trial), solver generators from
(seed, trial, sweep point, method index), and records are sorted on a stable
key before export, so worker-pool scheduling cannot change the output.

Within a trial, signal sets are prefix-nested across signal counts (the
r-signal covariance uses the first r columns of one long signal matrix), and
in the robust sweep the latent perturbation direction is drawn once per trial
and scaled by the noise magnitude, so curves across sweep points reflect the
swept quantity rather than a re-rolled sample.

Method names combine a base estimator with an optional augmentation:

    separate | pairwise-joint                      relaxed stationarity
                                                   baseline, projected
    +mod1   shared probability matrix (equal sizes)
    +mod2   shared discretized generator with given grid assignments
    +mod3   as mod2, re-estimating assignments around their anchors

The robust sweep uses its own method names (separate, shared-graphon, robust)
since both graphon methods there receive the same perturbed anchors.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .graphons import (GraphonSpec, build_block_averager, default_block_size,
                       grid_graphon, latent_to_grid, sample_graph, sample_latent)
from .signals import generate_stationary_signals, random_filter, sample_covariance
from .solver import (MODE_ROBUST, MODE_SHARED_GRAPHON, MODE_SHARED_PROB,
                     STATUS_CONVERGED, HyperParams, SolverConfig, solve,
                     solve_base)

logger = logging.getLogger(__name__)

LATENT_MODES = ("shared", "independent", "ranges")
BASES = ("separate", "pairwise-joint")
MODS = ("none", "mod1", "mod2", "mod3")

CSV_COLUMNS = ["trial", "method", "signal_count", "noise", "error",
               "graphon_error", "iterations"]


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def recovery_error(S_true: np.ndarray, S_hat: np.ndarray) -> float:
    """Relative Frobenius error ||S - S_hat||_F / ||S||_F."""
    S_true = np.asarray(S_true, dtype=float)
    S_hat = np.asarray(S_hat, dtype=float)
    if S_true.shape != S_hat.shape:
        raise ValueError(f"shape mismatch: {S_true.shape} vs {S_hat.shape}")
    denom = np.linalg.norm(S_true)
    if denom == 0.0:
        raise ValueError("reference graph has no edges; relative error undefined")
    return float(np.linalg.norm(S_true - S_hat) / denom)


def graphon_recovery_error(W_true: np.ndarray, W_hat: np.ndarray) -> float:
    """Relative Frobenius error between two same-size generator grids."""
    W_true = np.asarray(W_true, dtype=float)
    W_hat = np.asarray(W_hat, dtype=float)
    if W_true.shape != W_hat.shape:
        raise ValueError(f"grid mismatch: {W_true.shape} vs {W_hat.shape}")
    denom = np.linalg.norm(W_true)
    if denom == 0.0:
        raise ValueError("reference grid is zero; relative error undefined")
    return float(np.linalg.norm(W_true - W_hat) / denom)


# ---------------------------------------------------------------------------
# Methods
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Method:
    base: str = "separate"
    mod: str = "none"

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base estimator {self.base!r}; expected {BASES}")
        if self.mod not in MODS:
            raise ValueError(f"unknown augmentation {self.mod!r}; expected {MODS}")

    @property
    def name(self) -> str:
        return self.base if self.mod == "none" else f"{self.base}+{self.mod}"

    @classmethod
    def parse(cls, text: str) -> "Method":
        head, _, tail = text.strip().partition("+")
        return cls(head, tail or "none")


@dataclass
class TrialRecord:
    trial: int
    method: str
    signal_count: int
    noise: float
    error: float
    graphon_error: float
    iterations: int
    status: str
    wall_time: float

    def sort_key(self):
        return (self.noise, self.signal_count, self.trial, self.method)


@dataclass
class SweepResult:
    kind: str
    records: list[TrialRecord]
    diagnostics: dict[str, list] = field(default_factory=dict, repr=False)

    def sorted_records(self) -> list[TrialRecord]:
        return sorted(self.records, key=TrialRecord.sort_key)


# ---------------------------------------------------------------------------
# Configs
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Synthetic sweep over signal counts (the Fig. 2-style protocol)."""

    sizes: tuple[int, ...] = (30, 30, 30)
    graphon: GraphonSpec = field(default_factory=lambda: GraphonSpec("half-sum-squares"))
    latent_mode: str = "shared"
    latent_ranges: tuple[tuple[float, float], ...] | None = None
    signal_counts: tuple[int, ...] = (100, 1000)
    trials: int = 10
    seed: int = 0
    methods: tuple[str, ...] = ("separate", "separate+mod1")
    params: HyperParams = field(default_factory=HyperParams)
    solver: SolverConfig = field(default_factory=SolverConfig)
    grid_size: int | None = None
    filter_order: int = 3
    jobs: int = 1
    collect_diagnostics: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trial count must be at least 1")
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.signal_counts or min(self.signal_counts) < 1:
            raise ValueError("signal counts must be positive")
        if self.latent_mode not in LATENT_MODES:
            raise ValueError(f"unknown latent mode {self.latent_mode!r}; "
                             f"expected {LATENT_MODES}")
        if self.latent_mode == "ranges":
            if self.latent_ranges is None or len(self.latent_ranges) != len(self.sizes):
                raise ValueError("latent_mode='ranges' needs one (low, high) pair "
                                 "per graph")
        if self.latent_mode == "shared" and len(set(self.sizes)) != 1:
            raise ValueError("shared latent points require equally sized graphs")
        methods = [Method.parse(m) for m in self.methods]
        equal = len(set(self.sizes)) == 1
        for m in methods:
            if m.mod == "mod1" and not equal:
                raise ValueError("mod1 (shared probability) requires equally "
                                 "sized graphs")
            if m.base == "pairwise-joint":
                if not equal:
                    raise ValueError("pairwise-joint requires equally sized graphs")
                if self.params.pairwise <= 0:
                    raise ValueError("pairwise-joint methods need params.pairwise > 0")

    @property
    def G(self) -> int:
        return self.grid_size if self.grid_size is not None else sum(self.sizes)


@dataclass
class RobustSweepConfig:
    """Latent-perturbation sweep comparing anchored vs re-estimated grids.

    The default hyperparameters lower the histogram tie to lambda1 = 5: the
    bump graphon concentrated around the grid centre makes strong blockwise
    feedback counterproductive, and the probability-consensus contraction
    bound that motivates a large lambda1 applies only to the shared
    probability mode, which this sweep never runs.
    """

    sizes: tuple[int, ...] = (20, 20, 20)
    graphon: GraphonSpec = field(
        default_factory=lambda: GraphonSpec("gaussian-bump", beta=1000.0))
    latent_ranges: tuple[tuple[float, float], ...] = ((0.4, 0.6), (0.4, 0.6), (0.2, 0.4))
    noise_levels: tuple[float, ...] = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25)
    signal_count: int = 1000
    trials: int = 10
    seed: int = 0
    params: HyperParams = field(default_factory=lambda: HyperParams(lambda1=5.0))
    solver: SolverConfig = field(default_factory=SolverConfig)
    grid_size: int = 30
    filter_order: int = 3
    jobs: int = 1
    collect_diagnostics: bool = False

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trial count must be at least 1")
        if len(self.latent_ranges) != len(self.sizes):
            raise ValueError("need one latent range per graph")
        if any(n < 0 for n in self.noise_levels):
            raise ValueError("noise levels must be nonnegative")
        if self.signal_count < 1:
            raise ValueError("signal count must be positive")


ROBUST_METHODS = ("separate", "shared-graphon", "robust")


# ---------------------------------------------------------------------------
# Method dispatch
# ---------------------------------------------------------------------------

def _method_params(method: Method, params: HyperParams) -> HyperParams:
    if method.base == "pairwise-joint":
        return params
    return replace(params, pairwise=0.0)


def _solver_seed(base_seed: int, *path: int) -> int:
    return int(np.random.SeedSequence([base_seed, *path]).generate_state(1)[0])


def _run_method(method: Method, covariances: list[np.ndarray],
                params: HyperParams, config: SolverConfig,
                assignments: list[np.ndarray] | None, G: int | None):
    """Run one estimator; returns (graphs, graphon, iterations, status, diags)."""
    params = _method_params(method, params)
    if method.mod == "none":
        res = solve_base(covariances, params, config)
        return res.graphs, None, res.iterations, res.status, []
    if method.mod == "mod1":
        res = solve(MODE_SHARED_PROB, covariances, params, config)
    else:
        mode = MODE_SHARED_GRAPHON if method.mod == "mod2" else MODE_ROBUST
        res = solve(mode, covariances, params, config,
                    assignments=assignments, G=G)
    return res.graphs, res.graphon, res.iterations, res.status, res.diagnostics


# ---------------------------------------------------------------------------
# Synthetic sweep
# ---------------------------------------------------------------------------

def _sample_latents(config: ExperimentConfig, rng: np.random.Generator):
    if config.latent_mode == "shared":
        shared = sample_latent(config.sizes[0], rng)
        return [shared.copy() for _ in config.sizes]
    if config.latent_mode == "independent":
        return [sample_latent(n, rng) for n in config.sizes]
    return [sample_latent(n, rng, low, high)
            for n, (low, high) in zip(config.sizes, config.latent_ranges)]


def _synthetic_trial(config: ExperimentConfig, trial: int):
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, trial]))
    zetas = _sample_latents(config, rng)
    graphs = [sample_graph(config.graphon, z, rng) for z in zetas]
    filters = [random_filter(S, rng, config.filter_order) for S in graphs]
    r_max = max(config.signal_counts)
    signals = [generate_stationary_signals(S, h, r_max, rng)
               for S, h in zip(graphs, filters)]

    G = config.G
    assignments = [latent_to_grid(z, G) for z in zetas]
    W_true = grid_graphon(config.graphon, G)
    methods = [Method.parse(m) for m in config.methods]

    records, diagnostics = [], {}
    for count_idx, r in enumerate(sorted(config.signal_counts)):
        covariances = [sample_covariance(X[:, :r]) for X in signals]
        for m_idx, method in enumerate(methods):
            cfg = replace(config.solver,
                          seed=_solver_seed(config.seed, trial, count_idx, m_idx),
                          record_diagnostics=config.collect_diagnostics)
            start = time.perf_counter()
            est, W_hat, iters, status, diags = _run_method(
                method, covariances, config.params, cfg, assignments, G)
            wall = time.perf_counter() - start
            err = float(np.mean([recovery_error(S, S_hat)
                                 for S, S_hat in zip(graphs, est)]))
            g_err = (graphon_recovery_error(W_true, W_hat)
                     if W_hat is not None else math.nan)
            records.append(TrialRecord(trial, method.name, r, 0.0, err, g_err,
                                       iters, status, wall))
            if config.collect_diagnostics and diags:
                diagnostics[f"trial-{trial:03d}-r{r}-{method.name}"] = diags
    return records, diagnostics


def run_synthetic_sweep(config: ExperimentConfig) -> SweepResult:
    """Sample graphs/signals per trial and compare the configured methods."""
    results = _map_trials(_synthetic_trial, config, config.trials, config.jobs)
    records, diagnostics = _merge(results)
    return SweepResult("synthetic", sorted(records, key=TrialRecord.sort_key),
                       diagnostics)


# ---------------------------------------------------------------------------
# Robust sweep
# ---------------------------------------------------------------------------

def _robust_trial(config: RobustSweepConfig, trial: int):
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, trial]))
    zetas = [sample_latent(n, rng, low, high)
             for n, (low, high) in zip(config.sizes, config.latent_ranges)]
    graphs = [sample_graph(config.graphon, z, rng) for z in zetas]
    filters = [random_filter(S, rng, config.filter_order) for S in graphs]
    signals = [generate_stationary_signals(S, h, config.signal_count, rng)
               for S, h in zip(graphs, filters)]
    covariances = [sample_covariance(X) for X in signals]
    # one perturbation direction per trial, scaled by each noise magnitude
    omegas = [rng.uniform(-1.0, 1.0, size=n) for n in config.sizes]

    G = config.grid_size
    W_true = grid_graphon(config.graphon, G)
    records, diagnostics = [], {}
    for n_idx, noise in enumerate(config.noise_levels):
        noisy = [np.clip(z + noise * w, 0.0, 1.0) for z, w in zip(zetas, omegas)]
        anchors = [latent_to_grid(z, G) for z in noisy]
        eta = math.ceil(noise * G)
        params = replace(config.params, eta=eta)
        for m_idx, name in enumerate(ROBUST_METHODS):
            cfg = replace(config.solver,
                          seed=_solver_seed(config.seed, trial, n_idx, m_idx),
                          record_diagnostics=config.collect_diagnostics)
            start = time.perf_counter()
            if name == "separate":
                res = solve_base(covariances,
                                 _method_params(Method("separate"), params), cfg)
                est = res.graphs
                W_hat, iters, status, diags = None, res.iterations, res.status, []
            else:
                mode = MODE_SHARED_GRAPHON if name == "shared-graphon" else MODE_ROBUST
                res = solve(mode, covariances, params, cfg,
                            assignments=anchors, G=G)
                est, W_hat, iters, status, diags = (res.graphs, res.graphon,
                                                    res.iterations, res.status,
                                                    res.diagnostics)
            wall = time.perf_counter() - start
            err = float(np.mean([recovery_error(S, S_hat)
                                 for S, S_hat in zip(graphs, est)]))
            g_err = (graphon_recovery_error(W_true, W_hat)
                     if W_hat is not None else math.nan)
            records.append(TrialRecord(trial, name, config.signal_count, noise,
                                       err, g_err, iters, status, wall))
            if config.collect_diagnostics and diags:
                diagnostics[f"trial-{trial:03d}-n{noise:g}-{name}"] = diags
    return records, diagnostics


def run_robust_sweep(config: RobustSweepConfig) -> SweepResult:
    """Sweep latent-perturbation magnitudes with matched anchors per method."""
    results = _map_trials(_robust_trial, config, config.trials, config.jobs)
    records, diagnostics = _merge(results)
    return SweepResult("robust", sorted(records, key=TrialRecord.sort_key),
                       diagnostics)


# ---------------------------------------------------------------------------
# Worker pool
# ---------------------------------------------------------------------------

def _map_trials(fn, config, trials: int, jobs: int):
    if jobs <= 1 or trials == 1:
        return [fn(config, trial) for trial in range(trials)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, [config] * trials, range(trials)))


def _merge(results):
    records, diagnostics = [], {}
    for recs, diags in results:
        records.extend(recs)
        diagnostics.update(diags)
    return records, diagnostics


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def _float_cell(x: float) -> str:
    return "nan" if isinstance(x, float) and math.isnan(x) else repr(float(x))


def export_results(result: SweepResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write results.csv and summary.json; stable order, deterministic bytes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "results.csv"
    json_path = out_dir / "summary.json"

    records = result.sorted_records()
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([r.trial, r.method, r.signal_count,
                             _float_cell(r.noise), _float_cell(r.error),
                             _float_cell(r.graphon_error), r.iterations])

    with open(json_path, "w") as fh:
        json.dump(summarize(result), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def summarize(result: SweepResult) -> dict:
    """Per-method mean/stddev at each sweep point (population stddev)."""
    groups: dict[tuple, list[TrialRecord]] = {}
    for r in result.records:
        groups.setdefault((r.method, r.signal_count, r.noise), []).append(r)

    methods: dict[str, list] = {}
    for (method, count, noise) in sorted(groups):
        recs = groups[(method, count, noise)]
        errors = np.array([r.error for r in recs])
        g_errors = np.array([r.graphon_error for r in recs])
        entry = {
            "signal_count": count,
            "noise": noise,
            "trials": len(recs),
            "mean_error": float(errors.mean()),
            "std_error": float(errors.std()),
            "max_iterations_hit": sum(r.status != STATUS_CONVERGED for r in recs),
        }
        if not np.isnan(g_errors).any():
            entry["mean_graphon_error"] = float(g_errors.mean())
            entry["std_graphon_error"] = float(g_errors.std())
        methods.setdefault(method, []).append(entry)
    return {"kind": result.kind, "methods": methods}


# ---------------------------------------------------------------------------
# Senate experiment
# ---------------------------------------------------------------------------

SENATE_CASES = ("same-set", "nested-sizes", "disjoint")

_SENATE_DEFAULT_SIZES = {
    "same-set": (30,),
    "nested-sizes": (15, 30, 45),
    "disjoint": (30, 30, 30),
}


@dataclass
class SenateConfig:
    """Roll-call run: subgraph recovery from vote prefixes of growing length.

    Ground truth is the harness's own separate estimation per congress on all
    votes; methods see only the configured senator subsets and vote prefixes
    and are scored against the induced true subgraphs.
    """

    case: str = "same-set"
    subset_sizes: tuple[int, ...] | None = None
    senator_sets: tuple[tuple[int, ...], ...] | None = None
    vote_counts: tuple[int, ...] = (100, 300, 600)
    methods: tuple[str, ...] = ("separate", "separate+mod1")
    params: HyperParams = field(default_factory=HyperParams)
    solver: SolverConfig = field(default_factory=SolverConfig)
    seed: int = 0
    grid_size: int = 30
    collect_diagnostics: bool = False

    def __post_init__(self):
        if self.case not in SENATE_CASES:
            raise ValueError(f"unknown senate case {self.case!r}; "
                             f"expected {SENATE_CASES}")
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.vote_counts or min(self.vote_counts) < 1:
            raise ValueError("vote counts must be positive")
        if self.senator_sets is not None and self.case == "disjoint":
            seen: set[int] = set()
            for ids in self.senator_sets:
                overlap = seen.intersection(ids)
                if overlap:
                    raise ValueError(f"disjoint case but senators {sorted(overlap)} "
                                     "appear in more than one subset")
                seen.update(ids)
        for m in self.methods:
            Method.parse(m)

    def sizes_for(self, n_graphs: int) -> tuple[int, ...]:
        sizes = self.subset_sizes or _SENATE_DEFAULT_SIZES[self.case]
        if self.case == "same-set":
            return (sizes[0],) * n_graphs
        if len(sizes) != n_graphs:
            raise ValueError(f"case {self.case!r} needs one subset size per "
                             f"congress ({n_graphs}), got {len(sizes)}")
        return tuple(sizes)


def _senate_subsets(config: SenateConfig, datasets) -> list[np.ndarray]:
    """Member-id subsets per congress, drawn from the common roster."""
    if config.senator_sets is not None:
        if len(config.senator_sets) != len(datasets):
            raise ValueError("need one senator set per congress")
        return [np.asarray(ids, dtype=int) for ids in config.senator_sets]

    common = set(datasets[0].senator_ids.tolist())
    for ds in datasets[1:]:
        common &= set(ds.senator_ids.tolist())
    pool = np.array(sorted(common), dtype=int)
    sizes = config.sizes_for(len(datasets))

    if config.case == "disjoint":
        if sum(sizes) > pool.size:
            raise ValueError(f"disjoint subsets need {sum(sizes)} common "
                             f"senators, only {pool.size} available")
        subsets, offset = [], 0
        for n in sizes:
            subsets.append(pool[offset:offset + n])
            offset += n
        return subsets

    need = max(sizes)
    if need > pool.size:
        raise ValueError(f"subsets need {need} common senators, only "
                         f"{pool.size} available")
    return [pool[:n] for n in sizes]


def _rank_assignments(sizes: list[int], G: int) -> list[np.ndarray]:
    """Grid assignments from each subset's id order (a fixed proxy ordering)."""
    return [latent_to_grid((np.arange(n) + 0.5) / n, G) for n in sizes]


def run_senate_experiment(config: SenateConfig, datasets) -> SweepResult:
    """Score the configured methods on senator subsets and vote prefixes."""
    if len(datasets) < 3:
        raise ValueError(f"need at least 3 congress datasets, got {len(datasets)}")
    datasets = sorted(datasets, key=lambda d: d.congress)
    subsets = _senate_subsets(config, datasets)

    # Ground truth goes through the same stacked call as the separate method
    # so a subset covering everything reproduces it exactly.
    sep_params = _method_params(Method("separate"), config.params)
    full_covs = [sample_covariance(ds.votes) for ds in datasets]
    full_graphs = solve_base(full_covs, sep_params, config.solver).graphs
    truths = []
    for ds, ids, S_full in zip(datasets, subsets, full_graphs):
        rows = ds.rows_for(ids)
        truths.append(S_full[np.ix_(rows, rows)])

    sizes = [ids.size for ids in subsets]
    G = config.grid_size
    assignments = _rank_assignments(sizes, G)
    methods = [Method.parse(m) for m in config.methods]

    records, diagnostics = [], {}
    for count_idx, r in enumerate(sorted(config.vote_counts)):
        covariances = []
        for ds, ids in zip(datasets, subsets):
            rows = ds.rows_for(ids)
            covariances.append(sample_covariance(ds.votes[rows, :min(r, ds.n_rollcalls)]))
        for m_idx, method in enumerate(methods):
            cfg = replace(config.solver,
                          seed=_solver_seed(config.seed, count_idx, m_idx),
                          record_diagnostics=config.collect_diagnostics)
            start = time.perf_counter()
            est, _, iters, status, diags = _run_method(
                method, covariances, config.params, cfg, assignments, G)
            wall = time.perf_counter() - start
            err = float(np.mean([recovery_error(S, S_hat)
                                 for S, S_hat in zip(truths, est)]))
            records.append(TrialRecord(0, method.name, r, 0.0, err, math.nan,
                                       iters, status, wall))
            if config.collect_diagnostics and diags:
                diagnostics[f"votes-{r}-{method.name}"] = diags
    return SweepResult("senate", sorted(records, key=TrialRecord.sort_key),
                       diagnostics)


def export_diagnostics(result: SweepResult, out_dir: str | Path) -> list[Path]:
    """One CSV of per-iteration solver diagnostics per (trial, method) run."""
    from .solver import IterationDiagnostics

    out_dir = Path(out_dir) / "diagnostics"
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for key in sorted(result.diagnostics):
        path = out_dir / f"{key}.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(IterationDiagnostics.fieldnames())
            for diag in result.diagnostics[key]:
                writer.writerow(diag.as_row())
        paths.append(path)
    return paths
