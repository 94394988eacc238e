"""Protocol driver: per-trial optimization, transfer re-evaluation, aggregation.

Trials are independent jobs: every random draw derives from
(master seed, terrain, algorithm, trial index), so any subset can be re-run
in any order, serial or pooled, and produce identical bytes.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..errors import ConfigError, OptimizerDegenerateError
from ..evaluation import evaluate
from ..morphology import Genotype
from ..optimize import CmaEs, DescriptorBounds, QdOptimizer
from ..terrain import TERRAIN_NAMES
from .config import ExperimentConfig
from .records import ALGORITHMS, TrialRecord, record_path
from .seeds import derive_seed, trial_seed


def _map(pool, fn, items):
    items = list(items)
    if pool is None:
        return [fn(it) for it in items]
    return pool.map(fn, items)


def _eval_job(args):
    genes, terrain, cfg = args
    return evaluate(Genotype(genes), terrain, cfg.eval, cfg.body)


def warmup(cfg: ExperimentConfig | None = None) -> None:
    """Trigger JIT compilation of the simulation kernels (cheap after first build)."""
    cfg = cfg or ExperimentConfig()
    import dataclasses

    tiny = dataclasses.replace(cfg.eval, duration=0.05, settle_time=0.01)
    evaluate(Genotype((0.5, 0.5, 0.0, 0.5, 1.0)), cfg.terrain_for("flat"), tiny, cfg.body)


def run_optimization_phase(
    terrain_name: str,
    algorithm: str,
    trial: int,
    cfg: ExperimentConfig,
    master_seed: int,
    pool=None,
) -> TrialRecord:
    """Run one budgeted ask/evaluate/tell loop and record the training outcome."""
    if algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")
    batch = cfg.optimize.batch_size
    budget = cfg.run.budget
    if budget % batch != 0:
        raise ConfigError(f"run.budget ({budget}) must be divisible by optimize.batch_size ({batch})")
    seed = trial_seed(master_seed, terrain_name, algorithm, trial)
    record = TrialRecord(terrain=terrain_name, algorithm=algorithm, trial=trial, seed=seed)
    terrain = cfg.terrain_for(terrain_name)

    if algorithm == "cma":
        optimizer = CmaEs(
            dim=5,
            batch_size=batch,
            initial_mean=cfg.optimize.cma_initial_mean,
            initial_sigma=cfg.optimize.cma_initial_sigma,
            seed=seed,
        )
    else:
        optimizer = QdOptimizer(
            bounds=cfg.optimize.descriptor_bounds(),
            batch_size=batch,
            mutation_sigma=cfg.optimize.mutation_sigma,
            init_budget=cfg.optimize.init_budget,
            seed=seed,
            grid_size=cfg.optimize.grid_size,
        )

    best_genotype: Genotype | None = None
    best_result = None
    try:
        for _ in range(budget // batch):
            asks = optimizer.ask()
            results = _map(pool, _eval_job, [(g.genes, terrain, cfg) for g in asks])
            if algorithm == "cma":
                optimizer.tell(list(zip(asks, [r.fitness for r in results])))
                for g, r in zip(asks, results):
                    if not r.failed and (best_result is None or r.fitness > best_result.fitness):
                        best_genotype, best_result = g, r
            else:
                optimizer.tell(list(zip(asks, results)))
            record.training_evals += len(asks)
    except OptimizerDegenerateError as exc:
        record.failed = True
        record.error = str(exc)
        return record

    if algorithm == "cma":
        if best_result is None:
            record.failed = True
            record.error = "every evaluation failed"
            return record
        record.champion = best_genotype
        record.champion_result = best_result
        record.training_best_fitness = best_result.fitness
    else:
        record.archive = optimizer.archive
        top = optimizer.archive.best()
        if top is None:
            record.failed = True
            record.error = "archive is empty: every evaluation failed"
            return record
        record.training_best_fitness = top.result.fitness
    return record


def run_transfer_phase(record: TrialRecord, cfg: ExperimentConfig, pool=None) -> TrialRecord:
    """Re-evaluate the trial's gait(s) on every other terrain; no re-training.

    cma: the champion once per terrain. qda: every elite per terrain,
    recording the best re-evaluated fitness. Failed evaluations score 0.
    """
    if record.failed:
        return record
    others = [t for t in cfg.run.terrains if t != record.terrain]
    if record.algorithm == "cma":
        genotypes = [record.champion]
    else:
        genotypes = [e.genotype for e in record.archive.elites()]
    jobs = []
    for terrain_name in others:
        terrain = cfg.terrain_for(terrain_name)
        jobs += [(g.genes, terrain, cfg) for g in genotypes]
    results = _map(pool, _eval_job, jobs)

    record.transfers = {}
    record.transfer_evals = len(jobs)
    record.failed_transfer_evals = sum(1 for r in results if r.failed)
    k = len(genotypes)
    for idx, terrain_name in enumerate(others):
        chunk = results[idx * k:(idx + 1) * k]
        record.transfers[terrain_name] = max(r.fitness for r in chunk)
    return record


@dataclass
class Aggregation:
    """Transfer matrices (mean fitness change per train/target pair) and raw distributions."""

    terrains: tuple[str, ...]
    matrices: dict[str, dict[tuple[str, str], float | None]]
    distributions: list[tuple]
    trial_counts: dict[tuple[str, str], int] = field(default_factory=dict)
    failed_counts: dict[tuple[str, str], int] = field(default_factory=dict)

    def cell(self, algorithm: str, train: str, target: str) -> float | None:
        return self.matrices[algorithm].get((train, target))


def aggregate(records: list[TrialRecord], terrains=None) -> Aggregation:
    """Mean (transfer - training) fitness per cell; failed trials counted, excluded."""
    if terrains is None:
        present = {r.terrain for r in records}
        terrains = tuple(t for t in TERRAIN_NAMES if t in present)
    terrains = tuple(terrains)
    matrices: dict[str, dict[tuple[str, str], float | None]] = {}
    distributions: list[tuple] = []
    trial_counts: dict[tuple[str, str], int] = {}
    failed_counts: dict[tuple[str, str], int] = {}
    for algorithm in ALGORITHMS:
        matrix: dict[tuple[str, str], float | None] = {}
        for train in terrains:
            rows = sorted(
                (r for r in records if r.algorithm == algorithm and r.terrain == train),
                key=lambda r: r.trial,
            )
            ok = [r for r in rows if not r.failed]
            trial_counts[(train, algorithm)] = len(ok)
            failed_counts[(train, algorithm)] = len(rows) - len(ok)
            for r in ok:
                distributions.append(
                    (train, algorithm, r.trial, "train", train, r.training_best_fitness)
                )
                for target, fit in r.transfers.items():
                    distributions.append((train, algorithm, r.trial, "transfer", target, fit))
            for target in terrains:
                if target == train:
                    continue
                diffs = [
                    r.transfers[target] - r.training_best_fitness
                    for r in ok
                    if target in r.transfers
                ]
                matrix[(train, target)] = (sum(diffs) / len(diffs)) if diffs else None
        matrices[algorithm] = matrix
    return Aggregation(terrains, matrices, distributions, trial_counts, failed_counts)


def write_matrix_csv(agg: Aggregation, algorithm: str, path) -> None:
    """6x6-style CSV: rows = training terrain, columns = transfer terrain.

    Diagonal cells are blank (undefined); cells with no successful trials
    are written as NA.
    """
    lines = ["train\\transfer," + ",".join(agg.terrains)]
    for train in agg.terrains:
        row = [train]
        for target in agg.terrains:
            if target == train:
                row.append("")
            else:
                v = agg.matrices[algorithm].get((train, target))
                row.append("NA" if v is None else repr(float(v)))
        lines.append(",".join(row))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_distributions_csv(agg: Aggregation, path) -> None:
    """Long-format fitness rows for box plots."""
    lines = ["train_terrain,algorithm,trial,phase,eval_terrain,fitness"]
    for train, algorithm, trial, phase, target, fit in agg.distributions:
        lines.append(f"{train},{algorithm},{trial},{phase},{target},{float(fit)!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _train_job(args):
    terrain_name, algorithm, trial, cfg, master_seed, out_root = args
    record = run_optimization_phase(terrain_name, algorithm, trial, cfg, master_seed)
    record.save(record_path(out_root, terrain_name, algorithm, trial))
    return record


def _transfer_job(args):
    record, cfg, out_root = args
    record = run_transfer_phase(record, cfg)
    record.save(record_path(out_root, record.terrain, record.algorithm, record.trial))
    return record


def _make_pool(workers: int):
    if workers <= 1:
        return None
    import multiprocessing

    try:
        ctx = multiprocessing.get_context("fork")
    except ValueError:  # platforms without fork
        ctx = multiprocessing.get_context("spawn")
    return ctx.Pool(workers)


def run_full(
    cfg: ExperimentConfig,
    master_seed: int,
    out_dir,
    workers: int = 1,
    log=lambda msg: print(msg, file=sys.stderr),
) -> Aggregation:
    """The whole protocol: train both algorithms per terrain x trial, transfer, aggregate."""
    import json

    from .. import __version__
    from .records import MANIFEST_NAME

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = datetime.now(timezone.utc).isoformat()
    jobs = [
        (terrain, algorithm, trial, cfg, master_seed, str(out))
        for terrain in cfg.run.terrains
        for algorithm in ALGORITHMS
        for trial in range(cfg.run.trials)
    ]
    warmup(cfg)  # compile once in the parent so forked workers inherit the JIT
    pool = _make_pool(workers)
    try:
        log(f"optimization phase: {len(jobs)} trials ({cfg.run.budget} evaluations each)")
        records = _map(pool, _train_job, jobs)
        log(f"transfer phase: {len(records)} trials across {len(cfg.run.terrains) - 1} terrains each")
        records = _map(pool, _transfer_job, [(r, cfg, str(out)) for r in records])
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    agg = aggregate(records, cfg.run.terrains)
    write_matrix_csv(agg, "cma", out / "matrices" / "matrix_cma.csv")
    write_matrix_csv(agg, "qda", out / "matrices" / "matrix_qda.csv")
    write_distributions_csv(agg, out / "matrices" / "distributions.csv")

    manifest = {
        "format": "softgait-manifest",
        "version": 1,
        "softgait_version": __version__,
        "master_seed": master_seed,
        "config": cfg.to_dict(),
        "trial_seeds": {
            f"{t}/{a}/{k}": trial_seed(master_seed, t, a, k)
            for t in cfg.run.terrains
            for a in ALGORITHMS
            for k in range(cfg.run.trials)
        },
        "timestamps": {
            "started_utc": started,
            "finished_utc": datetime.now(timezone.utc).isoformat(),
        },
    }
    (out / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n")
    failed = sum(agg.failed_counts.values())
    log(f"done: {len(records)} trials, {failed} failed; outputs under {out}")
    return agg


def run_pilot(
    cfg: ExperimentConfig,
    master_seed: int,
    samples: int = 1000,
    terrain_name: str = "flat",
    pool=None,
) -> tuple[DescriptorBounds, dict]:
    """Calibrate archive descriptor bounds: [0, p99] over uniform-random gaits."""
    seed = derive_seed(master_seed, "pilot", terrain_name, samples)
    rng = np.random.Generator(np.random.PCG64(seed))
    genes = rng.random((samples, 5))
    terrain = cfg.terrain_for(terrain_name)
    results = _map(pool, _eval_job, [(tuple(float(v) for v in row), terrain, cfg) for row in genes])
    ok = [r for r in results if not r.failed]
    if not ok:
        raise ConfigError("pilot produced no successful evaluations; check the sim config")
    squishes = np.array([r.squish for r in ok])
    wobbles = np.array([r.wobble for r in ok])
    bounds = DescriptorBounds(
        (0.0, max(float(np.percentile(squishes, 99.0)), 1e-12)),
        (0.0, max(float(np.percentile(wobbles, 99.0)), 1e-12)),
    )
    stats = {
        "samples": samples,
        "failed": samples - len(ok),
        "terrain": terrain_name,
        "squish_p99": bounds.squish[1],
        "wobble_p99": bounds.wobble[1],
        "squish_max": float(squishes.max()),
        "wobble_max": float(wobbles.max()),
        "fitness_max": float(max(r.fitness for r in ok)),
        "fitness_mean": float(np.mean([r.fitness for r in ok])),
    }
    return bounds, stats
