"""Command line interface for the gait workbench.

Subcommands: pilot (calibrate descriptor bounds), optimize (one trial),
transfer (complete trial records), full (whole protocol), aggregate,
trace (single-gait sample dump), terrain-export.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import SoftgaitError
from .evaluation import evaluate_traced, write_trace_csv
from .experiment.config import ExperimentConfig
from .experiment.records import MANIFEST_NAME, TrialRecord, find_record_paths, record_path
from .experiment.runner import (
    _make_pool,
    aggregate,
    run_full,
    run_optimization_phase,
    run_pilot,
    warmup,
    write_distributions_csv,
    write_matrix_csv,
)
from .morphology import Genotype
from .terrain import TERRAIN_NAMES, make_terrain

DESK_PRESET = {"terrains": ("flat", "spiky", "valley"), "trials": 10, "budget": 600}


def _load_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if getattr(args, "config", None) else ExperimentConfig()
    run_kwargs = {}
    if getattr(args, "preset", None) == "desk":
        run_kwargs.update(DESK_PRESET)
    for name in ("budget", "trials"):
        value = getattr(args, name, None)
        if value is not None:
            run_kwargs[name] = value
    terrains = getattr(args, "terrains", None)
    if terrains is not None:
        run_kwargs["terrains"] = tuple(t.strip() for t in terrains.split(","))
    if run_kwargs:
        cfg = dataclasses.replace(cfg, run=dataclasses.replace(cfg.run, **run_kwargs))
    return cfg


def _add_common(p, *, config=True, workers=False, seed=False):
    if config:
        p.add_argument("--config", help="path to a config JSON file (defaults are built in)")
    if workers:
        p.add_argument("--workers", type=int, default=1, help="worker process count (default 1)")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softgait", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pilot", help="calibrate descriptor bounds and write a config file")
    _add_common(p, workers=True, seed=True)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--terrain", default="flat", choices=TERRAIN_NAMES)
    p.add_argument("--out", required=True, help="path for the calibrated config JSON")

    p = sub.add_parser("optimize", help="train one terrain x algorithm x trial")
    _add_common(p, workers=True, seed=True)
    p.add_argument("--terrain", required=True, choices=TERRAIN_NAMES)
    p.add_argument("--algorithm", required=True, choices=("cma", "qda"))
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("transfer", help="complete transfer fitness for stored trial records")
    _add_common(p, workers=True)
    p.add_argument("--terrains", default=None, help="comma-separated terrain list override")
    p.add_argument("--out", required=True, help="output directory holding results/")

    p = sub.add_parser("full", help="whole protocol: train, transfer, aggregate")
    _add_common(p, workers=True, seed=True)
    p.add_argument("--preset", choices=("desk",), default=None,
                   help="desk: flat,spiky,valley / 10 trials / budget 600")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--terrains", default=None, help="comma-separated terrain list")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("aggregate", help="recompute matrices from stored records")
    _add_common(p)
    p.add_argument("--out", required=True, help="output directory holding results/")

    p = sub.add_parser("trace", help="dump sampled gait signals for one genotype")
    _add_common(p)
    p.add_argument("--genotype", required=True, help="five comma-separated genes in [0,1]")
    p.add_argument("--terrain", required=True, choices=TERRAIN_NAMES)
    p.add_argument("--out", required=True, help="CSV path")

    p = sub.add_parser("terrain-export", help="write a terrain's vertex list as CSV")
    _add_common(p)
    p.add_argument("--terrain", required=True, choices=TERRAIN_NAMES)
    p.add_argument("--out", required=True, help="CSV path")
    return parser


def _cmd_pilot(args) -> int:
    cfg = _load_config(args)
    warmup(cfg)
    pool = _make_pool(args.workers)
    try:
        bounds, stats = run_pilot(cfg, args.seed, args.samples, args.terrain, pool=pool)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    new_opt = dataclasses.replace(
        cfg.optimize, squish_bounds=bounds.squish, wobble_bounds=bounds.wobble
    )
    dataclasses.replace(cfg, optimize=new_opt).save(args.out)
    print(json.dumps(stats, indent=2))
    print(f"wrote calibrated config to {args.out}")
    return 0


def _cmd_optimize(args) -> int:
    cfg = _load_config(args)
    warmup(cfg)
    pool = _make_pool(args.workers)
    try:
        record = run_optimization_phase(
            args.terrain, args.algorithm, args.trial, cfg, args.seed, pool=pool
        )
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    path = record_path(args.out, args.terrain, args.algorithm, args.trial)
    record.save(path)
    status = "FAILED: " + (record.error or "") if record.failed else \
        f"best fitness {record.training_best_fitness!r}"
    print(f"{args.terrain}/{args.algorithm}/trial_{args.trial}: {status} -> {path}")
    return 0


def _cmd_transfer(args) -> int:
    cfg = _load_config(args)
    paths = find_record_paths(args.out)
    if not paths:
        print(f"error: no trial records under {args.out}/results", file=sys.stderr)
        return 2
    warmup(cfg)
    records = [TrialRecord.load(p) for p in paths]
    pool = _make_pool(args.workers)
    try:
        from .experiment.runner import _transfer_job

        records = (pool.map if pool else lambda f, it: [f(x) for x in it])(
            _transfer_job, [(r, cfg, args.out) for r in records]
        )
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    print(f"completed transfers for {len(records)} records under {args.out}")
    return 0


def _cmd_full(args) -> int:
    cfg = _load_config(args)
    run_full(cfg, args.seed, args.out, workers=args.workers)
    return 0


def _cmd_aggregate(args) -> int:
    cfg = None
    manifest_path = Path(args.out) / MANIFEST_NAME
    if getattr(args, "config", None):
        cfg = ExperimentConfig.load(args.config)
    elif manifest_path.is_file():
        cfg = ExperimentConfig.from_dict(json.loads(manifest_path.read_text())["config"])
    paths = find_record_paths(args.out)
    if not paths:
        print(f"error: no trial records under {args.out}/results", file=sys.stderr)
        return 2
    records = [TrialRecord.load(p) for p in paths]
    agg = aggregate(records, cfg.run.terrains if cfg else None)
    out = Path(args.out)
    write_matrix_csv(agg, "cma", out / "matrices" / "matrix_cma.csv")
    write_matrix_csv(agg, "qda", out / "matrices" / "matrix_qda.csv")
    write_distributions_csv(agg, out / "matrices" / "distributions.csv")
    print(f"wrote matrices for {len(records)} records under {out / 'matrices'}")
    return 0


def _cmd_trace(args) -> int:
    cfg = _load_config(args)
    genes = tuple(float(v) for v in args.genotype.split(","))
    genotype = Genotype(genes)
    result, trace = evaluate_traced(
        genotype, cfg.terrain_for(args.terrain), cfg.eval, cfg.body
    )
    write_trace_csv(trace, args.out)
    print(
        f"fitness {result.fitness!r} squish {result.squish!r} wobble {result.wobble!r} "
        f"failed {result.failed} -> {args.out}"
    )
    return 0


def _cmd_terrain_export(args) -> int:
    cfg = _load_config(args)
    make_terrain(args.terrain, cfg.terrain).export_csv(args.out)
    print(f"wrote {args.terrain} vertices to {args.out}")
    return 0


_COMMANDS = {
    "pilot": _cmd_pilot,
    "optimize": _cmd_optimize,
    "transfer": _cmd_transfer,
    "full": _cmd_full,
    "aggregate": _cmd_aggregate,
    "trace": _cmd_trace,
    "terrain-export": _cmd_terrain_export,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SoftgaitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
