"""2D mass-spring soft-body core: domain types, forces, and time stepping.

Bodies are built from point masses joined by spring-dampers, grouped into
square voxels (4 corners, 4 edge springs, 2 diagonal springs). State lives
in packed float64 arrays; every step goes through the compiled kernel in
_kernel.py. Gravity acts in -y; the ground is a terrain polyline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernel
from .errors import (
    ConfigError,
    OutOfExtentError,
    UnstableSimulationError,
    ValidationError,
)
from .terrain import Terrain


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValidationError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass(frozen=True)
class PointMass:
    position: Vec2
    velocity: Vec2
    mass: float

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0.0):
            raise ValidationError(f"point mass must be finite and > 0, got {self.mass}")


@dataclass(frozen=True)
class Spring:
    """Spring-damper between two masses.

    voxel_a/voxel_b are the owning voxel indices (equal when the spring
    belongs to a single voxel); the effective rest length under actuation is
    rest_length_base * (1 + actuation_gain * (mean(owner scales) - 1)).
    """

    i: int
    j: int
    rest_length_base: float
    stiffness: float
    damping: float
    voxel_a: int = 0
    voxel_b: int = 0
    actuation_gain: float = 1.0

    def __post_init__(self):
        if self.i == self.j:
            raise ValidationError(f"spring endpoints must be distinct, got ({self.i}, {self.j})")
        if not (math.isfinite(self.rest_length_base) and self.rest_length_base > 0.0):
            raise ValidationError("spring rest_length_base must be finite and > 0")
        if not (math.isfinite(self.stiffness) and self.stiffness > 0.0):
            raise ValidationError("spring stiffness must be finite and > 0")
        if not (math.isfinite(self.damping) and self.damping >= 0.0):
            raise ValidationError("spring damping must be finite and >= 0")
        if not (0.0 <= self.actuation_gain <= 1.0):
            raise ValidationError("spring actuation_gain must be in [0, 1]")


@dataclass(frozen=True)
class Voxel:
    """Corner mass indices (bl, br, tl, tr), its 6 spring indices, and its column."""

    corners: tuple[int, int, int, int]
    springs: tuple[int, ...]
    column: int = 0


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-3
    gravity: float = 9.81
    contact_stiffness: float = 5e4
    contact_damping: float = 50.0
    friction_mu: float = 0.8
    max_penetration_tolerance: float = 0.02

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ConfigError("sim.dt must be finite and > 0")
        for name in ("gravity", "contact_stiffness", "contact_damping",
                     "friction_mu", "max_penetration_tolerance"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ConfigError(f"sim.{name} must be finite and >= 0")


class SoftBody:
    """Point masses + spring network with live kinematic state.

    Mutable: step() advances positions/velocities in place. Use copy() to
    snapshot. initial_position records the build pose (used as the rest pose
    for pitch measurements); corner_ids optionally names the tracked
    (sw, ne, nw, se) corner masses.
    """

    def __init__(
        self,
        masses: Sequence[PointMass],
        springs: Sequence[Spring],
        voxels: Sequence[Voxel] = (),
        time: float = 0.0,
        corner_ids: tuple[int, int, int, int] | None = None,
    ):
        n = len(masses)
        if n == 0:
            raise ValidationError("a body needs at least one point mass")
        self.pos = np.array([[m.position.x, m.position.y] for m in masses], dtype=np.float64)
        self.vel = np.array([[m.velocity.x, m.velocity.y] for m in masses], dtype=np.float64)
        self.mass_arr = np.array([m.mass for m in masses], dtype=np.float64)
        self.sp_i = np.array([s.i for s in springs], dtype=np.int64)
        self.sp_j = np.array([s.j for s in springs], dtype=np.int64)
        self.sp_rest = np.array([s.rest_length_base for s in springs], dtype=np.float64)
        self.sp_k = np.array([s.stiffness for s in springs], dtype=np.float64)
        self.sp_c = np.array([s.damping for s in springs], dtype=np.float64)
        self.sp_va = np.array([s.voxel_a for s in springs], dtype=np.int64)
        self.sp_vb = np.array([s.voxel_b for s in springs], dtype=np.int64)
        self.sp_gain = np.array([s.actuation_gain for s in springs], dtype=np.float64)
        self.voxels = tuple(voxels)
        self.time = float(time)
        self.corner_ids = corner_ids
        self.initial_position = self.pos.copy()
        self._validate()

    def _validate(self) -> None:
        n = self.n_masses
        if self.sp_i.size:
            idx = np.concatenate([self.sp_i, self.sp_j])
            if idx.min() < 0 or idx.max() >= n:
                raise ValidationError("spring endpoint index out of range")
        for a in range(n):
            for b in range(a + 1, n):
                if self.pos[a, 0] == self.pos[b, 0] and self.pos[a, 1] == self.pos[b, 1]:
                    raise ValidationError(f"masses {a} and {b} are coincident; corners must be shared, not duplicated")
        nv = len(self.voxels)
        for vi, v in enumerate(self.voxels):
            if len(v.corners) != 4 or len(set(v.corners)) != 4:
                raise ValidationError(f"voxel {vi} must have 4 distinct corner masses")
            if len(v.springs) != 6:
                raise ValidationError(f"voxel {vi} must reference 6 springs")
            if any(s < 0 or s >= self.n_springs for s in v.springs):
                raise ValidationError(f"voxel {vi} spring index out of range")
        if self.sp_va.size:
            hi = max(self.sp_va.max(), self.sp_vb.max())
            if hi >= max(nv, 1) or min(self.sp_va.min(), self.sp_vb.min()) < 0:
                raise ValidationError("spring owner voxel index out of range")
        if n > 1:
            # spring graph must be connected
            parent = list(range(n))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for i, j in zip(self.sp_i, self.sp_j):
                parent[find(int(i))] = find(int(j))
            roots = {find(a) for a in range(n)}
            if len(roots) > 1:
                raise ValidationError("spring graph is disconnected")

    @property
    def n_masses(self) -> int:
        return self.pos.shape[0]

    @property
    def n_springs(self) -> int:
        return self.sp_i.shape[0]

    @property
    def n_voxels(self) -> int:
        return len(self.voxels)

    @property
    def masses(self) -> list[PointMass]:
        return [
            PointMass(Vec2(*self.pos[a]), Vec2(*self.vel[a]), float(self.mass_arr[a]))
            for a in range(self.n_masses)
        ]

    @property
    def springs(self) -> list[Spring]:
        return [
            Spring(
                int(self.sp_i[s]), int(self.sp_j[s]), float(self.sp_rest[s]),
                float(self.sp_k[s]), float(self.sp_c[s]),
                int(self.sp_va[s]), int(self.sp_vb[s]), float(self.sp_gain[s]),
            )
            for s in range(self.n_springs)
        ]

    def copy(self) -> "SoftBody":
        dup = object.__new__(SoftBody)
        dup.pos = self.pos.copy()
        dup.vel = self.vel.copy()
        dup.mass_arr = self.mass_arr.copy()
        for name in ("sp_i", "sp_j", "sp_rest", "sp_k", "sp_c", "sp_va", "sp_vb", "sp_gain"):
            setattr(dup, name, getattr(self, name).copy())
        dup.voxels = self.voxels
        dup.time = self.time
        dup.corner_ids = self.corner_ids
        dup.initial_position = self.initial_position.copy()
        return dup

    def momentum(self) -> np.ndarray:
        return (self.mass_arr[:, None] * self.vel).sum(axis=0)

    def kinetic_energy(self) -> float:
        return float(0.5 * (self.mass_arr * (self.vel ** 2).sum(axis=1)).sum())

    def effective_rest_lengths(self, rest_scale: np.ndarray) -> np.ndarray:
        scale = _check_rest_scale(self, rest_scale)
        blended = 0.5 * (scale[self.sp_va] + scale[self.sp_vb])
        return self.sp_rest * (1.0 + self.sp_gain * (blended - 1.0))

    def spring_potential(self, rest_scale: np.ndarray) -> float:
        rest = self.effective_rest_lengths(rest_scale)
        d = self.pos[self.sp_j] - self.pos[self.sp_i]
        length = np.sqrt((d ** 2).sum(axis=1))
        return float(0.5 * (self.sp_k * (length - rest) ** 2).sum())

    def mechanical_energy(self, rest_scale: np.ndarray) -> float:
        return self.kinetic_energy() + self.spring_potential(rest_scale)


def _check_rest_scale(body: SoftBody, rest_scale) -> np.ndarray:
    scale = np.asarray(rest_scale, dtype=np.float64)
    nv = body.n_voxels
    if scale.shape != (nv,):
        raise ValidationError(f"rest_scale must have one entry per voxel ({nv}), got shape {scale.shape}")
    if nv and not np.all((scale > 0.0) & (scale < 2.0)):
        raise ValidationError("rest_scale entries must lie in (0, 2)")
    if nv == 0:
        return np.ones(1)
    return scale


def _kernel_args(body: SoftBody, scale: np.ndarray, terrain: Terrain, config: SimConfig):
    return (
        body.pos, body.vel, body.mass_arr,
        body.sp_i, body.sp_j, body.sp_rest, body.sp_k, body.sp_c,
        body.sp_va, body.sp_vb, body.sp_gain,
        scale, terrain.xs, terrain.ys,
        config.dt, config.gravity, config.contact_stiffness,
        config.contact_damping, config.friction_mu,
    )


def _raise_for_status(status: int, time: float) -> None:
    if status == _kernel.NONFINITE:
        raise UnstableSimulationError(time)
    if status == _kernel.OUT_OF_EXTENT:
        raise OutOfExtentError(f"a mass left the terrain extent at t={time:.6f}s")


def accumulate_forces(
    body: SoftBody, rest_scale, terrain: Terrain, config: SimConfig
) -> np.ndarray:
    """Per-mass force array (n, 2): springs + gravity + ground contact."""
    scale = _check_rest_scale(body, rest_scale)
    force = np.empty_like(body.pos)
    status = _kernel.accumulate_forces(*_kernel_args(body, scale, terrain, config), force)
    _raise_for_status(int(status), body.time)
    return force


def step(body: SoftBody, rest_scale, terrain: Terrain, config: SimConfig) -> SoftBody:
    """Advance the body by one dt (semi-implicit Euler), in place."""
    return run_steps(body, rest_scale, terrain, config, 1)


def run_steps(
    body: SoftBody, rest_scale, terrain: Terrain, config: SimConfig, n_steps: int
) -> SoftBody:
    """Advance n_steps with a constant rest scale, in place."""
    scale = _check_rest_scale(body, rest_scale)
    status, done = _kernel.step_n(*_kernel_args(body, scale, terrain, config), n_steps)
    body.time += int(done) * config.dt
    if int(status) != _kernel.OK:
        body.time += config.dt  # the failing step
    _raise_for_status(int(status), body.time)
    return body
