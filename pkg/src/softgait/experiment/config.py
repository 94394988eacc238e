"""Whole-workbench configuration with strict JSON round-trip.

Every constant of the simulation, controller, optimizers, and experiment
protocol lives here. Unknown fields in a config file are rejected with a
diagnostic naming the field.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from ..errors import ConfigError
from ..evaluation import EvalConfig
from ..morphology import BodyParams
from ..optimize import DescriptorBounds
from ..physics import SimConfig
from ..terrain import TERRAIN_NAMES, Terrain, TerrainConfig, make_terrain

# Default descriptor ranges for archive binning, calibrated with
# `softgait pilot`: 1000 uniform-random gaits on flat terrain (master seed 0),
# upper bound at the 99th percentile of each descriptor.
PILOT_SQUISH_BOUNDS = (0.0, 0.21881218283345671)
PILOT_WOBBLE_BOUNDS = (0.0, 6.760375340125472)


@dataclass(frozen=True)
class OptimizeConfig:
    batch_size: int = 20
    grid_size: int = 10
    squish_bounds: tuple[float, float] = PILOT_SQUISH_BOUNDS
    wobble_bounds: tuple[float, float] = PILOT_WOBBLE_BOUNDS
    mutation_sigma: float = 0.1
    init_budget: int = 100
    cma_initial_mean: float = 0.5
    cma_initial_sigma: float = 0.3

    def __post_init__(self):
        object.__setattr__(self, "squish_bounds", tuple(float(v) for v in self.squish_bounds))
        object.__setattr__(self, "wobble_bounds", tuple(float(v) for v in self.wobble_bounds))
        if self.batch_size < 2:
            raise ConfigError("optimize.batch_size must be >= 2")
        if self.grid_size < 1:
            raise ConfigError("optimize.grid_size must be >= 1")
        if not (math.isfinite(self.mutation_sigma) and self.mutation_sigma > 0.0):
            raise ConfigError("optimize.mutation_sigma must be finite and > 0")
        if self.init_budget < 0:
            raise ConfigError("optimize.init_budget must be >= 0")
        if not (math.isfinite(self.cma_initial_sigma) and self.cma_initial_sigma > 0.0):
            raise ConfigError("optimize.cma_initial_sigma must be finite and > 0")
        if not (0.0 <= self.cma_initial_mean <= 1.0):
            raise ConfigError("optimize.cma_initial_mean must lie in [0, 1]")
        for name in ("squish_bounds", "wobble_bounds"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(f"optimize.{name} must be finite with lo < hi")

    def descriptor_bounds(self) -> DescriptorBounds:
        return DescriptorBounds(self.squish_bounds, self.wobble_bounds)


@dataclass(frozen=True)
class RunConfig:
    budget: int = 2000
    trials: int = 30
    terrains: tuple[str, ...] = TERRAIN_NAMES

    def __post_init__(self):
        object.__setattr__(self, "terrains", tuple(self.terrains))
        if self.budget < 1:
            raise ConfigError("run.budget must be >= 1")
        if self.trials < 1:
            raise ConfigError("run.trials must be >= 1")
        if not self.terrains:
            raise ConfigError("run.terrains must not be empty")
        if len(set(self.terrains)) != len(self.terrains):
            raise ConfigError("run.terrains must be distinct")
        for name in self.terrains:
            if name not in TERRAIN_NAMES:
                raise ConfigError(f"run.terrains contains unknown terrain {name!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    eval: EvalConfig = field(default_factory=EvalConfig)
    body: BodyParams = field(default_factory=BodyParams)
    terrain: TerrainConfig = field(default_factory=TerrainConfig)
    optimize: OptimizeConfig = field(default_factory=OptimizeConfig)
    run: RunConfig = field(default_factory=RunConfig)

    @property
    def sim(self) -> SimConfig:
        return self.eval.sim

    def terrain_for(self, name: str) -> Terrain:
        return make_terrain(name, self.terrain)

    def to_dict(self) -> dict:
        # canonical JSON form: tuples become lists
        return json.loads(json.dumps(dataclasses.asdict(self)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _reject_unknown(data, {"eval", "body", "terrain", "optimize", "run"}, "config")
        eval_data = dict(data.get("eval", {}))
        sim_data = eval_data.pop("sim", {})
        return cls(
            eval=_build(EvalConfig, {**eval_data, "sim": _build(SimConfig, sim_data, "eval.sim")}, "eval"),
            body=_build(BodyParams, data.get("body", {}), "body"),
            terrain=_build(TerrainConfig, data.get("terrain", {}), "terrain"),
            optimize=_build(OptimizeConfig, data.get("optimize", {}), "optimize"),
            run=_build(RunConfig, data.get("run", {}), "run"),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(data)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_json(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


def _reject_unknown(data: dict, known: set[str], path: str) -> None:
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown config field '{path}.{key}'")


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"config section '{path}' must be an object")
    _reject_unknown(data, {f.name for f in fields(cls)}, path)
    converters = {"occupancy": lambda v: tuple(tuple(c) for c in v),
                  "terrains": tuple,
                  "squish_bounds": tuple,
                  "wobble_bounds": tuple}
    kwargs = {k: converters.get(k, lambda x: x)(v) for k, v in data.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"bad value in config section '{path}': {exc}") from exc
