"""Experiment protocol: configuration, records, seeds, and the run driver."""

from .config import ExperimentConfig, OptimizeConfig, RunConfig
from .records import ALGORITHMS, TrialRecord, find_record_paths, record_path
from .runner import (
    Aggregation,
    aggregate,
    run_full,
    run_optimization_phase,
    run_pilot,
    run_transfer_phase,
    warmup,
)
from .seeds import derive_seed, trial_seed

__all__ = [
    "ExperimentConfig", "OptimizeConfig", "RunConfig",
    "ALGORITHMS", "TrialRecord", "find_record_paths", "record_path",
    "Aggregation", "aggregate", "run_full", "run_optimization_phase",
    "run_pilot", "run_transfer_phase", "warmup",
    "derive_seed", "trial_seed",
]
