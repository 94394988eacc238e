"""Independent brute-force twins of production numerics, used only by tests."""

from __future__ import annotations

import bisect
import math


def force_oracle(body, rest_scale, terrain, cfg):
    """Naive per-mass force computation: pure Python, bisect-based terrain lookup."""
    n = body.n_masses
    forces = [[0.0, -float(body.mass_arr[a]) * cfg.gravity] for a in range(n)]
    scale = [float(s) for s in rest_scale] if body.n_voxels else [1.0]
    pos = body.pos
    vel = body.vel
    for s in body.springs:
        blended = 0.5 * (scale[s.voxel_a] + scale[s.voxel_b])
        rest = s.rest_length_base * (1.0 + s.actuation_gain * (blended - 1.0))
        dx = pos[s.j, 0] - pos[s.i, 0]
        dy = pos[s.j, 1] - pos[s.i, 1]
        length = math.hypot(dx, dy)
        if length < 1e-12:
            continue
        ux, uy = dx / length, dy / length
        rel = (vel[s.j, 0] - vel[s.i, 0]) * ux + (vel[s.j, 1] - vel[s.i, 1]) * uy
        fmag = s.stiffness * (length - rest) + s.damping * rel
        forces[s.i][0] += fmag * ux
        forces[s.i][1] += fmag * uy
        forces[s.j][0] -= fmag * ux
        forces[s.j][1] -= fmag * uy
    xs = list(terrain.xs)
    ys = list(terrain.ys)
    for a in range(n):
        x, y = float(pos[a, 0]), float(pos[a, 1])
        seg = min(max(bisect.bisect_right(xs, x) - 1, 0), len(xs) - 2)
        slope = (ys[seg + 1] - ys[seg]) / (xs[seg + 1] - xs[seg])
        h = ys[seg] + (x - xs[seg]) * slope
        depth = h - y
        if depth > 0.0:
            inv = 1.0 / math.sqrt(1.0 + slope * slope)
            nx, ny = -slope * inv, inv
            vn = vel[a, 0] * nx + vel[a, 1] * ny
            fn = max(cfg.contact_stiffness * depth * ny - cfg.contact_damping * vn, 0.0)
            forces[a][0] += fn * nx
            forces[a][1] += fn * ny
            vt = vel[a, 0] * inv + vel[a, 1] * slope * inv
            ft = min(cfg.friction_mu * fn, float(body.mass_arr[a]) * abs(vt) / cfg.dt)
            if vt > 0.0:
                ft = -ft
            elif vt == 0.0:
                ft = 0.0
            forces[a][0] += ft * inv
            forces[a][1] += ft * slope * inv
    return forces


def biped_graph_oracle(occupancy):
    """(unique corners, springs after dedup, naive spring refs, shared edges) by enumeration."""
    corners: set[tuple[int, int]] = set()
    edges: set[frozenset] = set()
    shared = 0
    diagonals = 0
    for c, r in occupancy:
        quad = [(c, r), (c + 1, r), (c, r + 1), (c + 1, r + 1)]
        corners.update(quad)
        for a, b in ((0, 1), (2, 3), (0, 2), (1, 3)):
            key = frozenset((quad[a], quad[b]))
            if key in edges:
                shared += 1
            edges.add(key)
        diagonals += 2
    springs = len(edges) + diagonals
    naive = 6 * len(occupancy)
    return len(corners), springs, naive, shared


def variance_oracle(values):
    """Two-pass population variance in pure Python."""
    values = list(values)
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values) / len(values)
