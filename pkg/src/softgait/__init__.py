"""Voxel soft-robot gait synthesis and terrain-transfer workbench."""

__version__ = "0.1.0"

from .errors import (
    BuildError,
    ConfigError,
    OptimizerDegenerateError,
    OutOfExtentError,
    ProtocolError,
    SoftgaitError,
    UnstableSimulationError,
    ValidationError,
)
from .evaluation import EvalConfig, GaitResult, evaluate, evaluate_traced, variance
from .morphology import (
    BipedLayout,
    BodyParams,
    ControlParams,
    Genotype,
    build_biped,
    decode,
    default_layout,
    rest_scale_at,
)
from .physics import (
    PointMass,
    SimConfig,
    SoftBody,
    Spring,
    Vec2,
    Voxel,
    accumulate_forces,
    run_steps,
    step,
)
from .terrain import TERRAIN_NAMES, Terrain, TerrainConfig, height_at, make_terrain

__all__ = [
    "__version__",
    "BuildError", "ConfigError", "OptimizerDegenerateError", "OutOfExtentError",
    "ProtocolError", "SoftgaitError", "UnstableSimulationError", "ValidationError",
    "EvalConfig", "GaitResult", "evaluate", "evaluate_traced", "variance",
    "BipedLayout", "BodyParams", "ControlParams", "Genotype",
    "build_biped", "decode", "default_layout", "rest_scale_at",
    "PointMass", "SimConfig", "SoftBody", "Spring", "Vec2", "Voxel",
    "accumulate_forces", "run_steps", "step",
    "TERRAIN_NAMES", "Terrain", "TerrainConfig", "height_at", "make_terrain",
]
