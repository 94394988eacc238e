"""Ground profiles: six named piecewise-linear height fields with height queries.

All terrains are functions of x (no overhangs). Vertices are laid out on
dyadic grids wherever possible so periodic profiles repeat exactly in
floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, OutOfExtentError, ValidationError

TERRAIN_NAMES = ("flat", "spiky", "longspikes", "longerspikes", "sawtooth", "valley")

FEATURE_HEIGHT = 0.5
TRIANGLE_PERIODS = {"spiky": 1.0, "longspikes": 2.0, "longerspikes": 4.0}
SAWTOOTH_PERIOD = 1.5
SAWTOOTH_RISE = 1.0  # rise:fall widths are 2:1 within each period


@dataclass(frozen=True)
class TerrainConfig:
    """Knobs for terrain construction."""

    extent: float = 200.0
    valley_slope: float = 0.2
    sawtooth_reversed: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.extent) and self.extent >= 200.0):
            raise ConfigError("terrain.extent must be finite and >= 200")
        if not (math.isfinite(self.valley_slope) and self.valley_slope > 0.0):
            raise ConfigError("terrain.valley_slope must be finite and > 0")


@dataclass(frozen=True, eq=False)
class Terrain:
    """A named ground profile: vertices with strictly increasing x."""

    name: str
    xs: np.ndarray
    ys: np.ndarray
    period: float | None = None

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.float64)
        ys = np.asarray(self.ys, dtype=np.float64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        if xs.ndim != 1 or xs.shape != ys.shape or xs.size < 2:
            raise ValidationError("terrain profile needs matching 1-D x/y arrays with >= 2 vertices")
        if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(ys))):
            raise ValidationError("terrain vertices must be finite")
        if not np.all(np.diff(xs) > 0):
            raise ValidationError("terrain vertex x coordinates must be strictly increasing")

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def height_at(self, x):
        """Linearly interpolated height; raises OutOfExtentError beyond the profile."""
        arr = np.asarray(x, dtype=np.float64)
        if np.any(arr < self.xs[0]) or np.any(arr > self.xs[-1]):
            raise OutOfExtentError(
                f"x outside terrain '{self.name}' extent [{self.xs[0]}, {self.xs[-1]}]"
            )
        out = np.interp(arr, self.xs, self.ys)
        return float(out) if np.isscalar(x) or arr.ndim == 0 else out

    def mirrored(self) -> "Terrain":
        """The profile reflected about x=0."""
        return Terrain(self.name + "-mirrored", -self.xs[::-1], self.ys[::-1], self.period)

    def export_csv(self, path) -> None:
        """Write the vertex list as two-column CSV (x,y per row)."""
        lines = ["x,y"]
        lines += [f"{float(x)!r},{float(y)!r}" for x, y in zip(self.xs, self.ys)]
        Path(path).write_text("\n".join(lines) + "\n")

    def __eq__(self, other):
        if not isinstance(other, Terrain):
            return NotImplemented
        return (
            self.name == other.name
            and self.period == other.period
            and np.array_equal(self.xs, other.xs)
            and np.array_equal(self.ys, other.ys)
        )


def height_at(terrain: Terrain, x):
    return terrain.height_at(x)


def _triangle_profile(period: float, extent: float) -> tuple[np.ndarray, np.ndarray]:
    # Troughs at integer multiples of the period (including x=0), apex at midpoint.
    half = period / 2.0
    n_seg = int(round(2.0 * extent / half))
    xs = np.empty(n_seg + 1)
    ys = np.empty(n_seg + 1)
    for k in range(n_seg + 1):
        xs[k] = -extent + k * half
        ys[k] = 0.0 if k % 2 == 0 else FEATURE_HEIGHT
    return xs, ys


def _sawtooth_profile(extent: float, reversed_: bool) -> tuple[np.ndarray, np.ndarray]:
    # Per period: linear rise over the first 2/3 (1.0 unit), twice-as-steep
    # linear fall over the final 1/3 (0.5 units).
    k0 = int(math.ceil(extent / SAWTOOTH_PERIOD))
    xs, ys = [], []
    for k in range(-k0, k0 + 1):
        base = k * SAWTOOTH_PERIOD
        xs += [base, base + SAWTOOTH_RISE]
        ys += [0.0, FEATURE_HEIGHT]
    xs = np.asarray(xs)
    ys = np.asarray(ys)
    if reversed_:
        xs, ys = -xs[::-1], ys[::-1]
    return xs, ys


def make_terrain(name: str, config: TerrainConfig | None = None) -> Terrain:
    """Construct one of the six named terrains.

    flat: y=0 everywhere. spiky / longspikes / longerspikes: symmetric
    triangles of period 1 / 2 / 4 units, 0.5 tall, trough at x=0. sawtooth:
    asymmetric teeth 1.5 units wide, 0.5 tall. valley: y = slope*|x|.
    """
    cfg = config or TerrainConfig()
    e = cfg.extent
    if name == "flat":
        return Terrain(name, np.array([-e, e]), np.array([0.0, 0.0]))
    if name in TRIANGLE_PERIODS:
        period = TRIANGLE_PERIODS[name]
        xs, ys = _triangle_profile(period, e)
        return Terrain(name, xs, ys, period=period)
    if name == "sawtooth":
        xs, ys = _sawtooth_profile(e, cfg.sawtooth_reversed)
        return Terrain(name, xs, ys, period=SAWTOOTH_PERIOD)
    if name == "valley":
        s = cfg.valley_slope
        return Terrain(name, np.array([-e, 0.0, e]), np.array([s * e, 0.0, s * e]))
    raise ConfigError(f"unknown terrain name {name!r}; expected one of {TERRAIN_NAMES}")
