"""Compiled inner loops for the mass-spring simulation.

Everything here operates on plain float64/int64 arrays so the hot path stays
inside numba. The Python-facing wrappers live in physics.py and
evaluation.py; both route every step through the same `_step_once` so there
is exactly one implementation of the dynamics.

Status codes: 0 ok, 1 non-finite state, 2 mass left the terrain extent.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
NONFINITE = 1
OUT_OF_EXTENT = 2


@njit(cache=True)
def find_segment(tx, x):
    """Index i with tx[i] <= x <= tx[i+1], or -1 when x is outside the profile."""
    n = tx.shape[0]
    if x < tx[0] or x > tx[n - 1]:
        return -1
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tx[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def terrain_height(tx, ty, x):
    """(height, status) by linear interpolation on the polyline."""
    seg = find_segment(tx, x)
    if seg < 0:
        return 0.0, OUT_OF_EXTENT
    slope = (ty[seg + 1] - ty[seg]) / (tx[seg + 1] - tx[seg])
    return ty[seg] + (x - tx[seg]) * slope, OK


@njit(cache=True)
def accumulate_forces(
    pos,
    vel,
    mass,
    sp_i,
    sp_j,
    sp_rest,
    sp_k,
    sp_c,
    sp_va,
    sp_vb,
    sp_gain,
    scale,
    tx,
    ty,
    dt,
    gravity,
    contact_k,
    contact_c,
    friction_mu,
    force,
):
    """Gravity + spring (Hooke and axial dashpot) + ground contact forces.

    The effective rest length of a spring is its base length scaled by the
    mean of its owning voxels' actuation factors, attenuated by the spring's
    actuation gain. Contact is a penalty force along the local surface
    normal (never pulling) plus Coulomb friction along the tangent, clamped
    both by mu*|normal| and by the force that would stop the tangential
    motion within one step.
    """
    n = pos.shape[0]
    for a in range(n):
        if not (
            math.isfinite(pos[a, 0])
            and math.isfinite(pos[a, 1])
            and math.isfinite(vel[a, 0])
            and math.isfinite(vel[a, 1])
        ):
            return NONFINITE
    for a in range(n):
        force[a, 0] = 0.0
        force[a, 1] = -mass[a] * gravity

    for s in range(sp_i.shape[0]):
        i = sp_i[s]
        j = sp_j[s]
        blended = 0.5 * (scale[sp_va[s]] + scale[sp_vb[s]])
        rest = sp_rest[s] * (1.0 + sp_gain[s] * (blended - 1.0))
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        length = math.sqrt(dx * dx + dy * dy)
        if length < 1e-12:
            continue  # coincident endpoints: direction undefined, skip
        ux = dx / length
        uy = dy / length
        rel = (vel[j, 0] - vel[i, 0]) * ux + (vel[j, 1] - vel[i, 1]) * uy
        fmag = sp_k[s] * (length - rest) + sp_c[s] * rel  # positive = tension
        fx = fmag * ux
        fy = fmag * uy
        force[i, 0] += fx
        force[i, 1] += fy
        force[j, 0] -= fx
        force[j, 1] -= fy

    for a in range(n):
        x = pos[a, 0]
        seg = find_segment(tx, x)
        if seg < 0:
            return OUT_OF_EXTENT
        slope = (ty[seg + 1] - ty[seg]) / (tx[seg + 1] - tx[seg])
        h = ty[seg] + (x - tx[seg]) * slope
        depth = h - pos[a, 1]  # vertical penetration
        if depth > 0.0:
            inv = 1.0 / math.sqrt(1.0 + slope * slope)
            nx = -slope * inv
            ny = inv
            vn = vel[a, 0] * nx + vel[a, 1] * ny
            fn = contact_k * depth * ny - contact_c * vn
            if fn < 0.0:
                fn = 0.0  # contact never pulls
            force[a, 0] += fn * nx
            force[a, 1] += fn * ny
            # tangent direction (inv, slope*inv); clamp friction so it can
            # at most cancel the tangential velocity within one step
            vt = vel[a, 0] * inv + vel[a, 1] * slope * inv
            fmax = friction_mu * fn
            fstop = mass[a] * abs(vt) / dt
            ft = fmax if fmax < fstop else fstop
            if vt > 0.0:
                ft = -ft
            elif vt == 0.0:
                ft = 0.0
            force[a, 0] += ft * inv
            force[a, 1] += ft * slope * inv
    return OK


@njit(cache=True)
def _step_once(
    pos,
    vel,
    mass,
    sp_i,
    sp_j,
    sp_rest,
    sp_k,
    sp_c,
    sp_va,
    sp_vb,
    sp_gain,
    scale,
    tx,
    ty,
    dt,
    gravity,
    contact_k,
    contact_c,
    friction_mu,
    force,
):
    status = accumulate_forces(
        pos, vel, mass, sp_i, sp_j, sp_rest, sp_k, sp_c, sp_va, sp_vb, sp_gain,
        scale, tx, ty, dt, gravity, contact_k, contact_c, friction_mu, force,
    )
    if status != OK:
        return status
    n = pos.shape[0]
    for a in range(n):
        # semi-implicit Euler: velocity first, then position with the new velocity
        vel[a, 0] += force[a, 0] / mass[a] * dt
        vel[a, 1] += force[a, 1] / mass[a] * dt
        pos[a, 0] += vel[a, 0] * dt
        pos[a, 1] += vel[a, 1] * dt
    for a in range(n):
        if not (math.isfinite(pos[a, 0]) and math.isfinite(pos[a, 1])):
            return NONFINITE
    return OK


@njit(cache=True)
def step_n(
    pos,
    vel,
    mass,
    sp_i,
    sp_j,
    sp_rest,
    sp_k,
    sp_c,
    sp_va,
    sp_vb,
    sp_gain,
    scale,
    tx,
    ty,
    dt,
    gravity,
    contact_k,
    contact_c,
    friction_mu,
    n_steps,
):
    """Advance n_steps with a constant per-voxel rest scale. Returns (status, steps_done)."""
    force = np.empty_like(pos)
    for step in range(n_steps):
        status = _step_once(
            pos, vel, mass, sp_i, sp_j, sp_rest, sp_k, sp_c, sp_va, sp_vb, sp_gain,
            scale, tx, ty, dt, gravity, contact_k, contact_c, friction_mu, force,
        )
        if status != OK:
            return status, step
    return OK, n_steps


@njit(cache=True)
def run_window(
    pos,
    vel,
    mass,
    sp_i,
    sp_j,
    sp_rest,
    sp_k,
    sp_c,
    sp_va,
    sp_vb,
    sp_gain,
    voxel_phase,
    amplitude,
    omega,
    tx,
    ty,
    dt,
    gravity,
    contact_k,
    contact_c,
    friction_mu,
    n_steps,
    sample_stride,
    sw,
    ne,
    nw,
    se,
    rest_cx,
    rest_cy,
    out_com_x,
    out_com_y,
    out_diag_main,
    out_diag_anti,
    out_pitch,
):
    """Run one actuated window, sampling gait signals every sample_stride steps.

    Per-voxel rest scale at local time t is 1 + amplitude*sin(omega*t + phase).
    Samples (taken before the step, so the first lands at t=0): mass-weighted
    center of mass, the two corner-to-corner diagonal distances, and the pitch
    angle of the best rigid rotation from the centered rest pose (rest_cx/
    rest_cy) onto the centered current pose.

    Returns (status, steps_done, samples_taken).
    """
    n = pos.shape[0]
    nv = voxel_phase.shape[0]
    n_samples = out_com_x.shape[0]
    scale = np.empty(nv)
    force = np.empty_like(pos)
    total_mass = 0.0
    for a in range(n):
        total_mass += mass[a]
    si = 0
    for step in range(n_steps):
        if sample_stride > 0 and si < n_samples and step == si * sample_stride:
            cx = 0.0
            cy = 0.0
            for a in range(n):
                cx += mass[a] * pos[a, 0]
                cy += mass[a] * pos[a, 1]
            out_com_x[si] = cx / total_mass
            out_com_y[si] = cy / total_mass
            dx = pos[ne, 0] - pos[sw, 0]
            dy = pos[ne, 1] - pos[sw, 1]
            out_diag_main[si] = math.sqrt(dx * dx + dy * dy)
            dx = pos[se, 0] - pos[nw, 0]
            dy = pos[se, 1] - pos[nw, 1]
            out_diag_anti[si] = math.sqrt(dx * dx + dy * dy)
            mx = 0.0
            my = 0.0
            for a in range(n):
                mx += pos[a, 0]
                my += pos[a, 1]
            mx /= n
            my /= n
            sdot = 0.0
            scross = 0.0
            for a in range(n):
                bx = pos[a, 0] - mx
                by = pos[a, 1] - my
                sdot += rest_cx[a] * bx + rest_cy[a] * by
                scross += rest_cx[a] * by - rest_cy[a] * bx
            out_pitch[si] = math.atan2(scross, sdot)
            si += 1
        t = step * dt
        for v in range(nv):
            scale[v] = 1.0 + amplitude * math.sin(omega * t + voxel_phase[v])
        status = _step_once(
            pos, vel, mass, sp_i, sp_j, sp_rest, sp_k, sp_c, sp_va, sp_vb, sp_gain,
            scale, tx, ty, dt, gravity, contact_k, contact_c, friction_mu, force,
        )
        if status != OK:
            return status, step, si
    return OK, n_steps, si
