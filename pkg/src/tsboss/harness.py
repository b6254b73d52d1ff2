"""Experiment runner: parameter sweeps, replicate aggregation, timing.

Every replicate derives its randomness from
SeedSequence(entropy=base_seed, spawn_key=(sweep_index, replicate)), so
rows are reproducible in isolation and replicates can run in parallel.
All row content except the wall-clock runtime column is a pure function
of the spec; aggregation excludes NaN metrics (undefined ratios) and
flags all-NaN groups.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__ as _version
from ._backend import backend_name
from .data import iid_windows, unroll
from .errors import InvalidInputError, RunFailureError
from .harness_schema import ROW_COLUMNS, SUMMARY_COLUMNS
from .metrics import evaluate
from .search import SearchConfig, run_ts_boss
from .simulate import GenConfig, sample_model, simulate, true_graph

SWEEPABLE = ("T", "density", "N", "autocorr")
METHODS = ("tsboss", "tsboss_iid")
MODES = ("cpdag", "dag")


@dataclass(frozen=True)
class ExperimentSpec:
    base: GenConfig = GenConfig()
    sweep_param: str = "T"
    sweep_values: tuple = (1000,)
    methods: tuple = ("tsboss",)
    run_bes: bool = False  # headline experiments report the first phase
    penalty_discount: float = 1.0
    num_restarts: int = 0

    def __post_init__(self):
        if self.sweep_param not in GenConfig.__dataclass_fields__:
            raise InvalidInputError(f"unknown sweep parameter {self.sweep_param!r}")
        if not self.sweep_values:
            raise InvalidInputError("sweep_values must be non-empty")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise InvalidInputError(f"unknown methods {sorted(bad)}")
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "methods", tuple(self.methods))

    @classmethod
    def from_json_dict(cls, obj):
        obj = dict(obj)
        base = GenConfig.from_json_dict(obj.pop("base", {}))
        sweep = obj.pop("sweep", {})
        kwargs = {
            "base": base,
            "sweep_param": sweep.get("param", "T"),
            "sweep_values": tuple(sweep.get("values", (base.T,))),
        }
        for key in ("methods", "run_bes", "penalty_discount", "num_restarts"):
            if key in obj:
                kwargs[key] = obj.pop(key)
        if obj:
            raise InvalidInputError(f"unknown spec fields {sorted(obj)}")
        if "methods" in kwargs:
            kwargs["methods"] = tuple(kwargs["methods"])
        return cls(**kwargs)

    @classmethod
    def load_json(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def config_for(self, sweep_value):
        value = sweep_value
        fields = GenConfig.__dataclass_fields__
        if fields[self.sweep_param].type in ("int",):
            value = int(value)
        return replace(self.base, **{self.sweep_param: value})


@dataclass
class RunRecord:
    rows: list
    summary: list
    manifest: dict
    failures: list = field(default_factory=list)


def _derived_seeds(base_seed, sweep_index, replicate):
    root = np.random.SeedSequence(
        entropy=base_seed, spawn_key=(sweep_index, replicate)
    )
    model_ss, data_ss, iid_ss, search_ss = root.spawn(4)
    return (
        np.random.default_rng(model_ss),
        np.random.default_rng(data_ss),
        np.random.default_rng(iid_ss),
        int(search_ss.generate_state(1)[0]),
    )


def run_replicate(spec, sweep_index, replicate):
    """All metric rows for one (sweep value, replicate) cell."""
    sweep_value = spec.sweep_values[sweep_index]
    cfg = spec.config_for(sweep_value)
    model_rng, data_rng, iid_rng, search_seed = _derived_seeds(
        cfg.rng_seed, sweep_index, replicate
    )
    model = sample_model(cfg, model_rng)
    truth = true_graph(model)
    data = simulate(model, cfg.T, cfg.burn_in, data_rng)
    search_cfg = SearchConfig(
        penalty_discount=spec.penalty_discount,
        run_bes=spec.run_bes,
        num_restarts=spec.num_restarts,
        rng_seed=search_seed,
    )
    rows = []
    for method in spec.methods:
        if method == "tsboss":
            wd = unroll(data, cfg.tau_max)
        else:
            # same row count as the sliding-window dataset, one final
            # window per independent realization
            n_real = cfg.T - cfg.tau_max
            realizations = [
                simulate(model, cfg.tau_max + 1, cfg.burn_in, iid_rng)
                for _ in range(n_real)
            ]
            wd = iid_windows(realizations, cfg.tau_max)
        t0 = time.perf_counter()
        result = run_ts_boss(wd, cfg.tau_max, search_cfg)
        runtime = time.perf_counter() - t0
        for mode in MODES:
            ev = evaluate(truth, result.cpdag, mode)
            row = {
                "sweep_param": spec.sweep_param,
                "sweep_value": sweep_value,
                "replicate": replicate,
                "method": method,
                "mode": mode,
                "n_rows": wd.n,
                "runtime_seconds": runtime,
                "search_seed": search_seed,
                "run_bes": spec.run_bes,
                "penalty_discount": spec.penalty_discount,
                "num_restarts": spec.num_restarts,
            }
            row.update(ev.as_row())
            row.update(cfg.to_json_dict())
            rows.append(row)
    return rows


def _replicate_task(args):
    spec, sweep_index, replicate = args
    try:
        return (sweep_index, replicate, run_replicate(spec, sweep_index, replicate), None)
    except Exception as exc:  # noqa: BLE001 - recorded and re-raised at run level
        return (sweep_index, replicate, None, f"{type(exc).__name__}: {exc}")


def run_experiment(spec, out_dir=None, jobs=1):
    """Execute the sweep; optionally write rows.csv / summary.csv /
    manifest.json under out_dir. Per-replicate failures are recorded and
    skipped; more than 10% failures aborts the run."""
    tasks = [
        (spec, si, k)
        for si in range(len(spec.sweep_values))
        for k in range(spec.base.K)
    ]
    t0 = time.perf_counter()
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_replicate_task, tasks))
    else:
        outcomes = [_replicate_task(t) for t in tasks]
    outcomes.sort(key=lambda o: (o[0], o[1]))
    rows = []
    failures = []
    for sweep_index, replicate, result, error in outcomes:
        if error is None:
            rows.extend(result)
        else:
            failures.append(
                {
                    "sweep_index": sweep_index,
                    "sweep_value": spec.sweep_values[sweep_index],
                    "replicate": replicate,
                    "error": error,
                }
            )
    if len(failures) > 0.10 * len(tasks):
        raise RunFailureError(
            f"{len(failures)} of {len(tasks)} replicates failed"
        )
    summary = aggregate(rows)
    manifest = {
        "spec": spec_to_json_dict(spec),
        "seed_scheme": (
            "SeedSequence(entropy=base rng_seed, "
            "spawn_key=(sweep_index, replicate)).spawn(4) -> "
            "(model, data, iid, search)"
        ),
        "iid_equalization": "row count matched: T - tau_max realizations",
        "backend": backend_name(),
        "version": _version,
        "failures": failures,
        "wall_time_seconds": time.perf_counter() - t0,
        "n_rows": len(rows),
    }
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_rows_csv(rows, os.path.join(out_dir, "rows.csv"))
        write_summary_csv(summary, os.path.join(out_dir, "summary.csv"))
        with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return RunRecord(rows=rows, summary=summary, manifest=manifest, failures=failures)


def spec_to_json_dict(spec):
    return {
        "base": spec.base.to_json_dict(),
        "sweep": {"param": spec.sweep_param, "values": list(spec.sweep_values)},
        "methods": list(spec.methods),
        "run_bes": spec.run_bes,
        "penalty_discount": spec.penalty_discount,
        "num_restarts": spec.num_restarts,
    }


METRICS = ("adj_precision", "adj_recall", "ori_precision", "ori_recall")


def aggregate(rows):
    """Per (method, mode, sweep value): NaN-excluded mean and standard
    error of each metric, plus mean runtime; all-NaN metrics flagged."""
    if not rows:
        raise InvalidInputError("nothing to aggregate")
    groups = {}
    for row in rows:
        groups.setdefault(
            (row["method"], row["mode"], row["sweep_value"]), []
        ).append(row)
    out = []
    for (method, mode, value), members in sorted(groups.items(), key=str):
        entry = {
            "method": method,
            "mode": mode,
            "sweep_param": members[0]["sweep_param"],
            "sweep_value": value,
            "n_replicates": len(members),
            "runtime_mean": float(
                np.mean([r["runtime_seconds"] for r in members])
            ),
        }
        for metric in METRICS:
            vals = [r[metric] for r in members if not math.isnan(r[metric])]
            entry[f"{metric}_n_valid"] = len(vals)
            entry[f"{metric}_all_nan"] = not vals
            if vals:
                entry[f"{metric}_mean"] = float(np.mean(vals))
                entry[f"{metric}_stderr"] = float(
                    np.std(vals, ddof=1) / math.sqrt(len(vals))
                    if len(vals) > 1
                    else 0.0
                )
            else:
                entry[f"{metric}_mean"] = math.nan
                entry[f"{metric}_stderr"] = math.nan
        out.append(entry)
    return out


def _format_cell(value):
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def write_rows_csv(rows, path, columns=ROW_COLUMNS):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_format_cell(row[c]) for c in columns])


def write_summary_csv(summary, path, columns=SUMMARY_COLUMNS):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in summary:
            writer.writerow([_format_cell(row[c]) for c in columns])
