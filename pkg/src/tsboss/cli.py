"""Command-line entry points: discover, simulate, bench."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .data import (
    iid_windows,
    load_csv,
    load_realizations_dir,
    load_realizations_grouped_csv,
    save_csv,
    unroll,
)
from .harness import ExperimentSpec, run_experiment
from .search import SearchConfig, run_ts_boss
from .simulate import GenConfig, sample_model, simulate


def _add_discover(sub):
    p = sub.add_parser("discover", help="estimate a window graph from data")
    p.add_argument("--input", required=True, help="CSV time series (rows = time)")
    p.add_argument("--tau-max", type=int, required=True)
    p.add_argument(
        "--iid-dir",
        help="directory of per-realization CSVs; one window per realization",
    )
    p.add_argument(
        "--iid-id-column",
        action="store_true",
        help="treat the input's first column as a realization id",
    )
    p.add_argument("--penalty-discount", type=float, default=1.0)
    p.add_argument("--no-bes", action="store_true", help="stop after phase 1")
    p.add_argument("--restarts", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--standardize", action="store_true")
    p.add_argument(
        "--no-gst-cache",
        action="store_true",
        help="debug: recompute every grow/shrink from scratch",
    )
    p.add_argument("--output", required=True, help="graph JSON destination")


def _add_simulate(sub):
    p = sub.add_parser("simulate", help="draw a model and simulate a series")
    p.add_argument("--config", help="generator JSON (defaults when omitted)")
    p.add_argument("--out-data", required=True)
    p.add_argument("--out-truth", required=True)


def _add_bench(sub):
    p = sub.add_parser("bench", help="run an experiment sweep")
    p.add_argument("--spec", required=True, help="experiment JSON")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory")


def _cmd_discover(args):
    if args.iid_dir and args.iid_id_column:
        raise SystemExit("choose one of --iid-dir / --iid-id-column")
    if args.iid_dir:
        realizations = load_realizations_dir(args.iid_dir)
        if args.standardize:
            realizations = [r.standardized() for r in realizations]
        wd = iid_windows(realizations, args.tau_max)
    elif args.iid_id_column:
        realizations = load_realizations_grouped_csv(args.input)
        if args.standardize:
            realizations = [r.standardized() for r in realizations]
        wd = iid_windows(realizations, args.tau_max)
    else:
        data = load_csv(args.input)
        if args.standardize:
            data = data.standardized()
        wd = unroll(data, args.tau_max)
    cfg = SearchConfig(
        penalty_discount=args.penalty_discount,
        run_bes=not args.no_bes,
        num_restarts=args.restarts,
        rng_seed=args.seed,
        use_gst_cache=not args.no_gst_cache,
    )
    result = run_ts_boss(wd, args.tau_max, cfg)
    result.output.save_json(args.output)
    kind = result.output.kind
    print(
        f"wrote {kind} with {len(result.output.edges)} edges to {args.output} "
        f"(phase-1 score {result.score:.6g})"
    )
    return 0


def _cmd_simulate(args):
    cfg = GenConfig.load_json(args.config) if args.config else GenConfig()
    rng = np.random.default_rng(np.random.SeedSequence(cfg.rng_seed))
    model = sample_model(cfg, rng)
    data = simulate(model, cfg.T, cfg.burn_in, rng)
    save_csv(data, args.out_data)
    from .simulate import true_graph

    true_graph(model).save_json(args.out_truth)
    print(f"wrote {cfg.T} x {cfg.N} series to {args.out_data}")
    return 0


def _cmd_bench(args):
    spec = ExperimentSpec.load_json(args.spec)
    record = run_experiment(spec, out_dir=args.out, jobs=args.jobs)
    print(
        f"wrote {len(record.rows)} rows, {len(record.summary)} summary rows "
        f"to {args.out} ({len(record.failures)} failures)"
    )
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="tsboss",
        description="score-based causal discovery for multivariate time series",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_discover(sub)
    _add_simulate(sub)
    _add_bench(sub)
    args = parser.parse_args(argv)
    if args.command == "discover":
        return _cmd_discover(args)
    if args.command == "simulate":
        return _cmd_simulate(args)
    return _cmd_bench(args)


if __name__ == "__main__":
    sys.exit(main())
