"""Score one gait: absolute horizontal speed plus squish/wobble descriptors.

A gait evaluation builds the biped above the terrain, lets it settle with
actuation off, then runs the scored window while sampling the body at a
fixed rate. Fitness is |com displacement| / duration. Squish is the
population variance of the corner-to-corner diagonal distances (both
diagonals pooled, which makes the measure mirror-symmetric). Wobble is the
population variance of the pitch angle, i.e. the best-fit rigid rotation
from the rest pose onto the current pose.

Numerically exploded runs never raise out of evaluate(): they yield a
result with failed=True and zeroed fitness/descriptors so optimizers can
discard them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import _kernel
from .errors import ConfigError, ValidationError
from .morphology import BodyParams, Genotype, build_biped, decode, default_layout
from .physics import SimConfig, SoftBody
from .terrain import Terrain

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class EvalConfig:
    duration: float = 25.0
    settle_time: float = 1.0
    descriptor_sample_rate: float = 20.0
    sim: SimConfig = field(default_factory=SimConfig)

    def __post_init__(self):
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ConfigError("eval.duration must be finite and > 0")
        if not (math.isfinite(self.settle_time) and self.settle_time >= 0.0):
            raise ConfigError("eval.settle_time must be finite and >= 0")
        if not (math.isfinite(self.descriptor_sample_rate) and self.descriptor_sample_rate > 0.0):
            raise ConfigError("eval.descriptor_sample_rate must be finite and > 0")


@dataclass(frozen=True)
class GaitResult:
    fitness: float
    squish: float
    wobble: float
    com_start_x: float
    com_end_x: float
    sample_count: int
    failed: bool = False

    def descriptors(self) -> tuple[float, float]:
        return (self.squish, self.wobble)


FAILED_RESULT = GaitResult(0.0, 0.0, 0.0, 0.0, 0.0, 0, failed=True)


def variance(samples) -> float:
    """Population variance (divide by N)."""
    arr = np.asarray(samples, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError("variance needs at least one sample")
    return float(np.var(arr))


def rigid_pitch(rest: np.ndarray, cur: np.ndarray) -> float:
    """Rotation angle of the least-squares rigid alignment rest -> cur (radians)."""
    a = rest - rest.mean(axis=0)
    b = cur - cur.mean(axis=0)
    sdot = float((a * b).sum())
    scross = float((a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]).sum())
    return math.atan2(scross, sdot)


def _com_x(body: SoftBody) -> float:
    return float((body.mass_arr * body.pos[:, 0]).sum() / body.mass_arr.sum())


def _run(g: Genotype, terrain: Terrain, cfg: EvalConfig, body_params: BodyParams):
    """Shared driver returning (result, trace_rows)."""
    params = decode(g, body_params)
    body = build_biped(default_layout(body_params), terrain, body_params)
    sim = cfg.sim
    if body.corner_ids is None:
        raise ValidationError("evaluation needs a body with tracked corners")
    sw, ne, nw, se = body.corner_ids
    rest = body.initial_position
    rest_cx = np.ascontiguousarray(rest[:, 0] - rest[:, 0].mean())
    rest_cy = np.ascontiguousarray(rest[:, 1] - rest[:, 1].mean())
    voxel_phase = np.array([params.column_phase[v.column] for v in body.voxels])
    omega = TWO_PI * params.frequency

    def window(amplitude: float, n_steps: int, stride: int, n_samples: int):
        outs = [np.zeros(n_samples) for _ in range(5)]
        status, steps, taken = _kernel.run_window(
            body.pos, body.vel, body.mass_arr,
            body.sp_i, body.sp_j, body.sp_rest, body.sp_k, body.sp_c,
            body.sp_va, body.sp_vb, body.sp_gain,
            voxel_phase, amplitude, omega,
            terrain.xs, terrain.ys,
            sim.dt, sim.gravity, sim.contact_stiffness, sim.contact_damping,
            sim.friction_mu,
            n_steps, stride, sw, ne, nw, se, rest_cx, rest_cy,
            outs[0], outs[1], outs[2], outs[3], outs[4],
        )
        body.time += steps * sim.dt
        return int(status), int(taken), outs

    settle_steps = int(round(cfg.settle_time / sim.dt))
    status, _, _ = window(0.0, settle_steps, 0, 0)
    if status != _kernel.OK:
        return FAILED_RESULT, np.zeros((0, 5))

    n_steps = int(round(cfg.duration / sim.dt))
    stride = max(1, int(round(1.0 / (cfg.descriptor_sample_rate * sim.dt))))
    n_samples = -(-n_steps // stride)  # ceil
    com_start = _com_x(body)
    status, taken, (com_x, com_y, diag_main, diag_anti, pitch) = window(
        params.amplitude, n_steps, stride, n_samples
    )
    times = np.arange(taken) * (stride * sim.dt)
    trace = np.column_stack([times, com_x[:taken], com_y[:taken], diag_main[:taken], pitch[:taken]])
    if status != _kernel.OK or taken < n_samples:
        return FAILED_RESULT, trace
    result = GaitResult(
        fitness=abs(_com_x(body) - com_start) / cfg.duration,
        squish=variance(np.concatenate([diag_main, diag_anti])),
        wobble=variance(pitch),
        com_start_x=com_start,
        com_end_x=_com_x(body),
        sample_count=n_samples,
        failed=False,
    )
    return result, trace


def evaluate(
    g: Genotype,
    terrain: Terrain,
    cfg: EvalConfig | None = None,
    body_params: BodyParams | None = None,
) -> GaitResult:
    result, _ = _run(g, terrain, cfg or EvalConfig(), body_params or BodyParams())
    return result


def evaluate_traced(
    g: Genotype,
    terrain: Terrain,
    cfg: EvalConfig | None = None,
    body_params: BodyParams | None = None,
) -> tuple[GaitResult, np.ndarray]:
    """Like evaluate(), also returning sampled rows (time, com_x, com_y, diag, pitch)."""
    return _run(g, terrain, cfg or EvalConfig(), body_params or BodyParams())


def write_trace_csv(trace: np.ndarray, path) -> None:
    lines = ["time,com_x,com_y,diag_distance,pitch"]
    lines += [",".join(repr(float(v)) for v in row) for row in trace]
    Path(path).write_text("\n".join(lines) + "\n")
