"""Command-line driver: sampling, single solves, sweeps, self-validation.

Configuration comes from a TOML file (sections [params], [solver],
[experiment], [robust], [senate], [sample], [infer]) with flags taking
precedence over file values. Logs go to stderr; all data products are files
under --output-dir. Exit codes: 0 success, 1 solver hit the iteration cap
(results are still written), 2 usage/config error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields, replace
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .experiments import (ExperimentConfig, RobustSweepConfig, SenateConfig,
                          export_diagnostics, export_results,
                          run_robust_sweep, run_senate_experiment,
                          run_synthetic_sweep)
from .graphons import GraphonSpec, latent_to_grid, sample_graph, sample_latent
from .selfcheck import run_operator_checks
from .signals import generate_stationary_signals, random_filter, sample_covariance
from .solver import (MODES, STATUS_CONVERGED, HyperParams, IterationDiagnostics,
                     SolverConfig, solve)
from .voteview import load_voteview, make_senate_fixture

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MAX_ITERATIONS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class UsageError(Exception):
    """Bad flags or config values (exit code 2)."""


class DataError(Exception):
    """Unreadable or malformed data files (exit code 3)."""


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def parse_invocation(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="graphjoint",
        description="Joint inference of multiple graph topologies from "
                    "stationary signals under a shared generative model.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser):
        p.add_argument("--config", type=Path, help="TOML configuration file")
        p.add_argument("--seed", type=int, help="override the base seed")
        p.add_argument("--output-dir", type=Path, default=Path("."),
                       help="directory all outputs are written under")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes for trial-parallel sweeps")
        p.add_argument("--as-printed", action="store_true",
                       help="use the update systems exactly as typed in the "
                            "source derivation (see README)")
        p.add_argument("--verbose", action="store_true",
                       help="debug-level logging on stderr")
        return p

    p = common(sub.add_parser("sample",
                              help="draw graphs and stationary signals"))
    p = common(sub.add_parser("infer", help="run one solve on given data"))
    p.add_argument("--input", type=Path, help=".npz with covariance_k or "
                                              "signals_k arrays")
    p.add_argument("--mode", choices=MODES, help="solver mode")
    p = common(sub.add_parser("sweep", help="synthetic signal-count sweep"))
    p.add_argument("--mode", choices=MODES,
                   help="method shortcut: shared-prob compares the separate "
                        "baseline against +mod1, shared-graphon against +mod2 "
                        "(robust requires the robust-sweep subcommand)")
    common(sub.add_parser("robust-sweep",
                          help="latent-perturbation sweep with re-estimated "
                               "grid assignments"))
    p = common(sub.add_parser("senate", help="roll-call vote experiment"))
    p.add_argument("--data", type=Path, help="voteview-schema CSV")
    p.add_argument("--fixture", action="store_true",
                   help="generate and use the synthetic fixture")
    p = common(sub.add_parser("validate-ops",
                              help="check sparse operators against dense "
                                   "evaluation"))
    p.add_argument("--instances", type=int, default=50,
                   help="number of random instances per check")

    args = parser.parse_args(argv)
    if args.command == "sweep" and getattr(args, "mode", None) == "robust":
        parser.error("--mode robust is not valid with `sweep`; "
                     "use the `robust-sweep` subcommand")
    return args


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

_TUPLE_KEYS = {"sizes", "signal_counts", "methods", "noise_levels",
               "vote_counts", "subset_sizes"}
_PAIR_TUPLE_KEYS = {"latent_ranges", "senator_sets"}


def _load_toml(path: Path | None) -> dict:
    if path is None:
        return {}
    if not path.exists():
        raise UsageError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from None


def _build(cls, section: dict, what: str, **extra):
    data = dict(section)
    data.update({k: v for k, v in extra.items() if v is not None})
    for key in list(data):
        if key in _TUPLE_KEYS and isinstance(data[key], (list, tuple)):
            data[key] = tuple(data[key])
        if key in _PAIR_TUPLE_KEYS and isinstance(data[key], (list, tuple)):
            data[key] = tuple(tuple(item) for item in data[key])
    if "graphon" in data and isinstance(data["graphon"], dict):
        data["graphon"] = GraphonSpec.from_config(data["graphon"])
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown [{what}] keys: {unknown}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad [{what}] config: {exc}") from None


def _solver_config(cfg: dict, args) -> SolverConfig:
    solver = _build(SolverConfig, cfg.get("solver", {}), "solver")
    if args.as_printed:
        solver = replace(solver, as_printed=True)
    return solver


def _params(cfg: dict) -> HyperParams:
    return _build(HyperParams, cfg.get("params", {}), "params")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_sample(args) -> int:
    cfg = _load_toml(args.config)
    sec = dict(cfg.get("sample", {}))
    sizes = tuple(sec.get("sizes", (20, 20)))
    graphon = GraphonSpec.from_config(sec.get("graphon",
                                              {"kind": "half-sum-squares"}))
    latent_mode = sec.get("latent_mode", "shared")
    ranges = sec.get("latent_ranges")
    count = int(sec.get("signals", 1000))
    order = int(sec.get("filter_order", 3))
    seed = args.seed if args.seed is not None else int(sec.get("seed", 0))

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    if latent_mode == "shared":
        if len(set(sizes)) != 1:
            raise UsageError("shared latent points require equal sizes")
        shared = sample_latent(sizes[0], rng)
        zetas = [shared.copy() for _ in sizes]
    elif latent_mode == "independent":
        zetas = [sample_latent(n, rng) for n in sizes]
    elif latent_mode == "ranges":
        if ranges is None or len(ranges) != len(sizes):
            raise UsageError("latent_mode='ranges' needs one [low, high] "
                             "pair per graph")
        zetas = [sample_latent(n, rng, lo, hi)
                 for n, (lo, hi) in zip(sizes, ranges)]
    else:
        raise UsageError(f"unknown latent_mode {latent_mode!r}")

    arrays = {}
    for k, (n, zeta) in enumerate(zip(sizes, zetas)):
        S = sample_graph(graphon, zeta, rng)
        X = generate_stationary_signals(S, random_filter(S, rng, order),
                                        count, rng)
        arrays[f"graph_{k}"] = S
        arrays[f"zeta_{k}"] = zeta
        arrays[f"signals_{k}"] = X
        arrays[f"covariance_{k}"] = sample_covariance(X)

    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    np.savez(out / "sample.npz", **arrays)
    with open(out / "sample.json", "w") as fh:
        json.dump({"sizes": list(sizes), "graphon": graphon.to_config(),
                   "latent_mode": latent_mode, "signals": count,
                   "seed": seed}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    logger.info("wrote %s", out / "sample.npz")
    return EXIT_OK


def _collect_indexed(data, stem: str) -> list[np.ndarray] | None:
    keys = sorted((k for k in data.keys() if k.startswith(f"{stem}_")),
                  key=lambda k: int(k.rsplit("_", 1)[1]))
    if not keys:
        return None
    return [np.asarray(data[k]) for k in keys]


def cmd_infer(args) -> int:
    cfg = _load_toml(args.config)
    sec = dict(cfg.get("infer", {}))
    input_path = args.input or (Path(sec["input"]) if "input" in sec else None)
    if input_path is None:
        raise UsageError("infer needs --input or [infer].input")
    if not input_path.exists():
        raise DataError(f"input file not found: {input_path}")

    with np.load(input_path) as data:
        covariances = _collect_indexed(data, "covariance")
        if covariances is None:
            signals = _collect_indexed(data, "signals")
            if signals is None:
                raise DataError(f"{input_path} contains neither covariance_k "
                                "nor signals_k arrays")
            covariances = [sample_covariance(X) for X in signals]
        assignments = _collect_indexed(data, "assignments")
        zetas = _collect_indexed(data, "zeta")

    mode = args.mode or sec.get("mode", "shared-prob")
    grid_size = sec.get("grid_size")
    G = int(grid_size) if grid_size is not None else sum(C.shape[0]
                                                         for C in covariances)
    if assignments is None and zetas is not None:
        assignments = [latent_to_grid(z, G) for z in zetas]
    if assignments is not None:
        assignments = [np.asarray(z, dtype=int) for z in assignments]

    params = _params(cfg)
    solver = _solver_config(cfg, args)
    if args.seed is not None:
        solver = replace(solver, seed=args.seed)

    try:
        result = solve(mode, covariances, params, solver,
                       assignments=assignments, G=G)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    out = args.output_dir
    out.mkdir(parents=True, exist_ok=True)
    arrays = {}
    for k, S in enumerate(result.graphs):
        arrays[f"adjacency_{k}"] = S
    for k, T in enumerate(result.probabilities):
        arrays[f"probability_{k}"] = T
    if result.graphon is not None:
        arrays["graphon"] = result.graphon
    if result.z is not None:
        for k, z in enumerate(result.z):
            arrays[f"assignments_{k}"] = z
    np.savez(out / "estimate.npz", **arrays)
    with open(out / "summary.json", "w") as fh:
        json.dump({"mode": result.mode, "status": result.status,
                   "iterations": result.iterations,
                   "converged": result.converged}, fh, indent=2,
                  sort_keys=True)
        fh.write("\n")
    _write_diagnostics_csv(out / "diagnostics.csv", result.diagnostics)
    logger.info("%s after %d iterations -> %s", result.status,
                result.iterations, out / "estimate.npz")
    return EXIT_OK if result.converged else EXIT_MAX_ITERATIONS


def _write_diagnostics_csv(path: Path, diagnostics) -> None:
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh, lineterminator="\n")
        writer.writerow(IterationDiagnostics.fieldnames())
        for diag in diagnostics:
            writer.writerow(diag.as_row())


def _sweep_exit(result) -> int:
    bad = sum(r.status != STATUS_CONVERGED for r in result.records)
    if bad:
        logger.warning("%d run(s) stopped at the iteration cap", bad)
        return EXIT_MAX_ITERATIONS
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_toml(args.config)
    sec = dict(cfg.get("experiment", {}))
    if getattr(args, "mode", None) == "shared-prob":
        sec["methods"] = ("separate", "separate+mod1")
    elif getattr(args, "mode", None) == "shared-graphon":
        sec["methods"] = ("separate", "separate+mod2")
    config = _build(ExperimentConfig, sec, "experiment",
                    params=_params(cfg), solver=_solver_config(cfg, args),
                    seed=args.seed, jobs=args.jobs)
    result = run_synthetic_sweep(config)
    export_results(result, args.output_dir)
    if config.collect_diagnostics:
        export_diagnostics(result, args.output_dir)
    logger.info("wrote %s", args.output_dir / "results.csv")
    return _sweep_exit(result)


def cmd_robust_sweep(args) -> int:
    cfg = _load_toml(args.config)
    config = _build(RobustSweepConfig, cfg.get("robust", {}), "robust",
                    params=_params(cfg), solver=_solver_config(cfg, args),
                    seed=args.seed, jobs=args.jobs)
    result = run_robust_sweep(config)
    export_results(result, args.output_dir)
    if config.collect_diagnostics:
        export_diagnostics(result, args.output_dir)
    logger.info("wrote %s", args.output_dir / "results.csv")
    return _sweep_exit(result)


def cmd_senate(args) -> int:
    cfg = _load_toml(args.config)
    sec = dict(cfg.get("senate", {}))
    data_path = args.data or (Path(sec.pop("data")) if "data" in sec else None)
    use_fixture = args.fixture or bool(sec.pop("fixture", False))
    fixture_senators = int(sec.pop("fixture_senators", 100))
    config = _build(SenateConfig, sec, "senate",
                    params=_params(cfg), solver=_solver_config(cfg, args),
                    seed=args.seed)

    if data_path is None:
        if not use_fixture:
            raise UsageError("senate needs --data FILE or --fixture")
        data_path = args.output_dir / "senate-fixture.csv"
        args.output_dir.mkdir(parents=True, exist_ok=True)
        make_senate_fixture(data_path, n_senators=fixture_senators,
                            seed=config.seed)
        logger.info("generated fixture %s", data_path)
    if not data_path.exists():
        raise DataError(f"vote data not found: {data_path}")

    try:
        datasets = load_voteview(data_path)
        result = run_senate_experiment(config, datasets)
    except ValueError as exc:
        raise DataError(str(exc)) from None

    export_results(result, args.output_dir)
    if config.collect_diagnostics:
        export_diagnostics(result, args.output_dir)
    logger.info("wrote %s", args.output_dir / "results.csv")
    return _sweep_exit(result)


def cmd_validate_ops(args) -> int:
    seed = args.seed if args.seed is not None else 0
    results = run_operator_checks(seed=seed, instances=args.instances)
    for check in results:
        print(check.line())
    return EXIT_OK if all(c.passed for c in results) else EXIT_MAX_ITERATIONS


_COMMANDS = {
    "sample": cmd_sample,
    "infer": cmd_infer,
    "sweep": cmd_sweep,
    "robust-sweep": cmd_robust_sweep,
    "senate": cmd_senate,
    "validate-ops": cmd_validate_ops,
}


def dispatch(args) -> int:
    return _COMMANDS[args.command](args)


def main(argv=None) -> int:
    args = parse_invocation(argv)
    logging.basicConfig(stream=sys.stderr,
                        level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return dispatch(args)
    except UsageError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except DataError as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except OSError as exc:
        logger.error("I/O failure: %s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
