"""The 5-voxel biped, its 5-gene controller encoding, and the actuation signal.

The genotype is five values in [0,1]: global amplitude, global frequency,
and one phase per voxel column. Columns oscillate their voxels' rest
lengths sinusoidally; both voxels of a column always share one scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BuildError, ConfigError, ValidationError
from .physics import PointMass, SoftBody, Spring, Vec2, Voxel
from .terrain import Terrain

# 3 columns x 2 rows: full outer columns (legs), top-only middle. (col, row),
# row 0 at the bottom.
CANONICAL_OCCUPANCY = ((0, 0), (0, 1), (1, 1), (2, 0), (2, 1))

GENE_COUNT = 5
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Genotype:
    """Five genes in [0,1]: amplitude, frequency, phase per column (L, M, R)."""

    genes: tuple[float, float, float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "genes", tuple(float(g) for g in self.genes))
        if len(self.genes) != GENE_COUNT:
            raise ValidationError(f"genotype needs exactly {GENE_COUNT} genes, got {len(self.genes)}")
        for k, g in enumerate(self.genes):
            if not (math.isfinite(g) and 0.0 <= g <= 1.0):
                raise ValidationError(f"gene {k} must lie in [0, 1], got {g}")

    @classmethod
    def from_array(cls, arr) -> "Genotype":
        return cls(tuple(float(v) for v in arr))

    def as_array(self) -> np.ndarray:
        return np.array(self.genes, dtype=np.float64)


@dataclass(frozen=True)
class ControlParams:
    amplitude: float
    frequency: float
    column_phase: tuple[float, float, float]

    def __post_init__(self):
        if not (math.isfinite(self.amplitude) and self.amplitude >= 0.0):
            raise ValidationError("amplitude must be finite and >= 0")
        if not (math.isfinite(self.frequency) and self.frequency > 0.0):
            raise ValidationError("frequency must be finite and > 0")
        if len(self.column_phase) != 3:
            raise ValidationError("need exactly 3 column phases")
        for p in self.column_phase:
            if not (0.0 <= p < TWO_PI):
                raise ValidationError(f"column phase must lie in [0, 2pi), got {p}")


@dataclass(frozen=True)
class BodyParams:
    """Material constants, control ranges, and layout defaults for the biped."""

    corner_mass: float = 1.0
    edge_stiffness: float = 5000.0
    diagonal_stiffness: float = 2500.0
    spring_damping: float = 10.0
    voxel_size: float = 1.0
    spawn_clearance: float = 0.1
    amplitude_max: float = 0.15
    frequency_min: float = 0.25
    frequency_max: float = 3.0
    occupancy: tuple[tuple[int, int], ...] = CANONICAL_OCCUPANCY

    def __post_init__(self):
        object.__setattr__(self, "occupancy", tuple((int(c), int(r)) for c, r in self.occupancy))
        for name in ("corner_mass", "edge_stiffness", "diagonal_stiffness", "voxel_size"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigError(f"body.{name} must be finite and > 0")
        if not (math.isfinite(self.spring_damping) and self.spring_damping >= 0.0):
            raise ConfigError("body.spring_damping must be finite and >= 0")
        if not (math.isfinite(self.spawn_clearance) and self.spawn_clearance >= 0.0):
            raise ConfigError("body.spawn_clearance must be finite and >= 0")
        if not (0.0 < self.amplitude_max < 1.0):
            raise ConfigError("body.amplitude_max must lie in (0, 1) so rest lengths stay positive")
        if not (0.0 < self.frequency_min < self.frequency_max):
            raise ConfigError("body.frequency_min/frequency_max must satisfy 0 < min < max")


@dataclass(frozen=True)
class BipedLayout:
    """Voxel occupancy grid plus geometry of the spawn pose."""

    occupancy: tuple[tuple[int, int], ...] = CANONICAL_OCCUPANCY
    voxel_size: float = 1.0
    spawn_offset: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))

    def __post_init__(self):
        object.__setattr__(self, "occupancy", tuple((int(c), int(r)) for c, r in self.occupancy))
        cells = self.occupancy
        if not cells:
            raise ValidationError("layout needs at least one voxel")
        if len(set(cells)) != len(cells):
            raise ValidationError("layout occupancy cells must be distinct")
        if any(c < 0 or c > 2 for c, _ in cells):
            raise ValidationError("voxel columns must lie in {0, 1, 2} (one phase per column)")
        # occupancy must be edge-connected
        seen = {cells[0]}
        frontier = [cells[0]]
        cellset = set(cells)
        while frontier:
            c, r = frontier.pop()
            for nb in ((c + 1, r), (c - 1, r), (c, r + 1), (c, r - 1)):
                if nb in cellset and nb not in seen:
                    seen.add(nb)
                    frontier.append(nb)
        if len(seen) != len(cells):
            raise ValidationError("layout occupancy must be edge-connected")
        if not (math.isfinite(self.voxel_size) and self.voxel_size > 0.0):
            raise ValidationError("layout voxel_size must be finite and > 0")

    @property
    def columns(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.occupancy)


def default_layout(params: BodyParams | None = None) -> BipedLayout:
    p = params or BodyParams()
    return BipedLayout(occupancy=p.occupancy, voxel_size=p.voxel_size)


def decode(g: Genotype, params: BodyParams | None = None) -> ControlParams:
    """Linear gene maps: amplitude, frequency range, and 2*pi phases (1 wraps to 0)."""
    p = params or BodyParams()
    amplitude = g.genes[0] * p.amplitude_max
    frequency = p.frequency_min + g.genes[1] * (p.frequency_max - p.frequency_min)
    phases = tuple(math.fmod(g.genes[2 + k] * TWO_PI, TWO_PI) for k in range(3))
    return ControlParams(amplitude, frequency, phases)


def rest_scale_at(params: ControlParams, t: float, layout: BipedLayout | None = None) -> np.ndarray:
    """Per-voxel rest-length scale at time t: 1 + A*sin(2*pi*f*t + column phase)."""
    lay = layout or default_layout()
    omega = TWO_PI * params.frequency
    return np.array(
        [1.0 + params.amplitude * math.sin(omega * t + params.column_phase[c]) for c in lay.columns]
    )


def build_biped(
    layout: BipedLayout,
    terrain: Terrain,
    params: BodyParams | None = None,
) -> SoftBody:
    """Assemble the biped above the terrain at spawn x = 0.

    Corner masses shared between adjacent voxels are created once; edge
    springs shared between two voxels are deduplicated and owned by both
    (their actuation scales blend). The body is centered horizontally,
    placed with its lowest ground clearance exactly spawn_clearance (plus
    any spawn_offset), and the rest-pose corner extremes (sw, ne, nw, se)
    are recorded for gait tracking.
    """
    p = params or BodyParams()
    lay = layout
    size = lay.voxel_size

    corner_index: dict[tuple[int, int], int] = {}
    lattice: list[tuple[int, int]] = []

    def corner(gx: int, gy: int) -> int:
        key = (gx, gy)
        if key not in corner_index:
            corner_index[key] = len(lattice)
            lattice.append(key)
        return corner_index[key]

    spring_index: dict[tuple[int, int], int] = {}
    # mutable spring records: [i, j, rest, stiffness, voxel_a, voxel_b]
    records: list[list] = []

    def claim_spring(a: int, b: int, rest: float, stiffness: float, voxel: int) -> int:
        key = (min(a, b), max(a, b))
        if key in spring_index:
            idx = spring_index[key]
            records[idx][5] = voxel  # second owner of a shared edge
            return idx
        spring_index[key] = len(records)
        records.append([key[0], key[1], rest, stiffness, voxel, voxel])
        return spring_index[key]

    voxels: list[Voxel] = []
    diag_rest = size * math.sqrt(2.0)
    for vi, (c, r) in enumerate(lay.occupancy):
        bl = corner(c, r)
        br = corner(c + 1, r)
        tl = corner(c, r + 1)
        tr = corner(c + 1, r + 1)
        sids = (
            claim_spring(bl, br, size, p.edge_stiffness, vi),
            claim_spring(tl, tr, size, p.edge_stiffness, vi),
            claim_spring(bl, tl, size, p.edge_stiffness, vi),
            claim_spring(br, tr, size, p.edge_stiffness, vi),
            claim_spring(bl, tr, diag_rest, p.diagonal_stiffness, vi),
            claim_spring(br, tl, diag_rest, p.diagonal_stiffness, vi),
        )
        voxels.append(Voxel(corners=(bl, br, tl, tr), springs=sids, column=c))

    gx = np.array([g for g, _ in lattice], dtype=np.float64)
    gy = np.array([g for _, g in lattice], dtype=np.float64)
    center = 0.5 * (gx.min() + gx.max()) * size
    xs = gx * size - center + lay.spawn_offset.x
    ys_base = gy * size
    ground = terrain.height_at(xs)
    shift = p.spawn_clearance + lay.spawn_offset.y + float(np.max(ground - ys_base))
    ys = ys_base + shift
    if np.any(ys < ground):
        raise BuildError("spawn pose collides with the terrain")

    masses = [
        PointMass(Vec2(float(x), float(y)), Vec2(0.0, 0.0), p.corner_mass)
        for x, y in zip(xs, ys)
    ]
    springs = [
        Spring(i, j, rest, k, p.spring_damping, va, vb, 1.0)
        for i, j, rest, k, va, vb in records
    ]
    diag_plus = xs + ys  # sw = min, ne = max
    diag_minus = xs - ys  # nw = min, se = max
    corner_ids = (
        int(np.argmin(diag_plus)),
        int(np.argmax(diag_plus)),
        int(np.argmin(diag_minus)),
        int(np.argmax(diag_minus)),
    )
    return SoftBody(masses, springs, voxels, time=0.0, corner_ids=corner_ids)
