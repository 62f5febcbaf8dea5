"""Simulated spinning LiDAR: one ray per (channel, azimuth step).

Stems are single oblique cones so ray-stem intersection reduces to one
quadratic per (ray, tree); bush domes are half-ellipsoids (also quadratic);
terrain is found by coarse marching plus bisection against the analytic
height function.
"""

from __future__ import annotations

import numpy as np

from .spec import LidarSpec
from .world import BUSH_DOME_HEIGHT, World

_T_MIN = 0.05          # m, ignore returns closer than the sensor housing
_MARCH_STEP = 0.4      # m
_BISECT_ITERS = 30


def ray_directions(lidar: LidarSpec) -> np.ndarray:
    """(R, 3) unit directions in the sensor frame, channel-major."""
    half = 0.5 * np.deg2rad(lidar.vertical_fov)
    elevations = np.linspace(-half, half, lidar.channels)
    azimuths = np.deg2rad(
        np.arange(0.0, 360.0, lidar.horizontal_resolution)
    )
    el, az = np.meshgrid(elevations, azimuths, indexing="ij")
    ce = np.cos(el)
    return np.stack(
        [ce * np.cos(az), ce * np.sin(az), np.sin(el)], axis=-1
    ).reshape(-1, 3)


def _intersect_trees(world: World, origin, dirs, max_range) -> np.ndarray:
    t_best = np.full(len(dirs), np.inf)
    if not world.trees:
        return t_best
    bases = np.array([t.base for t in world.trees])
    heights = np.array([t.height for t in world.trees])
    r0 = np.array([0.5 * t.base_diameter for t in world.trees])
    tau = np.array([0.5 * t.taper_rate for t in world.trees])
    lean = np.array(
        [
            [np.tan(t.lean_angle) * np.cos(t.lean_direction),
             np.tan(t.lean_angle) * np.sin(t.lean_direction)]
            for t in world.trees
        ]
    )  # (T, 2)

    reach = max_range + heights * np.abs(np.tan(0.2)) + r0 + 1.0
    near = np.hypot(bases[:, 0] - origin[0], bases[:, 1] - origin[1]) <= reach
    if not near.any():
        return t_best
    bases, heights, r0, tau, lean = (
        bases[near], heights[near], r0[near], tau[near], lean[near],
    )

    oz_rel = origin[2] - bases[:, 2]                            # (T,)
    A = (origin[:2] - bases[:, :2]) - lean * oz_rel[:, None]    # (T, 2)
    dz = dirs[:, 2][:, None]                                    # (R, 1)
    B = dirs[:, None, :2] - lean[None, :, :] * dz[:, :, None]   # (R, T, 2)
    c0 = r0 - tau * oz_rel                                      # (T,)
    c1 = -tau[None, :] * dz                                     # (R, T)

    a = np.einsum("rtk,rtk->rt", B, B) - c1**2
    b = 2.0 * (np.einsum("tk,rtk->rt", A, B) - c0[None, :] * c1)
    c = np.einsum("tk,tk->t", A, A)[None, :] - (c0**2)[None, :]

    disc = b**2 - 4.0 * a * c
    ok = (disc >= 0.0) & (np.abs(a) > 1e-12)
    sqrt_disc = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = np.stack(
            [(-b - sqrt_disc) / (2.0 * a), (-b + sqrt_disc) / (2.0 * a)], axis=-1
        )
    z_rel = oz_rel[None, :, None] + roots * dz[:, :, None]
    radius = c0[None, :, None] + c1[:, :, None] * roots
    valid = (
        ok[:, :, None]
        & (roots > _T_MIN)
        & (roots <= max_range)
        & (z_rel >= 0.0)
        & (z_rel <= heights[None, :, None])
        & (radius > 0.0)
    )
    roots = np.where(valid, roots, np.inf)
    return roots.reshape(len(dirs), -1).min(axis=1)


def _intersect_bushes(world: World, origin, dirs, max_range) -> np.ndarray:
    t_best = np.full(len(dirs), np.inf)
    bushes = [p for p in world.patches if p.kind == "bush"]
    for patch in bushes:
        cz = world.height(*patch.center)
        center = np.array([patch.center[0], patch.center[1], cz])
        axes = np.array([patch.radius, patch.radius, BUSH_DOME_HEIGHT])
        o = (origin - center) / axes
        d = dirs / axes
        a = np.einsum("rk,rk->r", d, d)
        b = 2.0 * d @ o
        c = o @ o - 1.0
        disc = b**2 - 4.0 * a * c
        ok = disc >= 0.0
        sqrt_disc = np.sqrt(np.where(ok, disc, 0.0))
        for sign in (-1.0, 1.0):
            t = (-b + sign * sqrt_disc) / (2.0 * a)
            z = origin[2] + t * dirs[:, 2]
            valid = ok & (t > _T_MIN) & (t <= max_range) & (z >= cz)
            t_best = np.where(valid & (t < t_best), t, t_best)
    return t_best


def _intersect_terrain(world: World, origin, dirs, max_range) -> np.ndarray:
    t_best = np.full(len(dirs), np.inf)
    zmax = world.max_surface_height()
    candidates = (dirs[:, 2] < 0.0) | (origin[2] <= zmax)
    idx = np.nonzero(candidates)[0]
    if idx.size == 0:
        return t_best
    d = dirs[idx]
    steps = np.arange(_T_MIN, max_range + _MARCH_STEP, _MARCH_STEP)
    px = origin[0] + np.outer(d[:, 0], steps)
    py = origin[1] + np.outer(d[:, 1], steps)
    pz = origin[2] + np.outer(d[:, 2], steps)
    above = pz > world.height(px, py)
    # first sample at/below the surface brackets the crossing
    below = ~above
    below[:, 0] = False  # sensor itself sits above the surface
    first = np.argmax(below, axis=1)
    hit = below[np.arange(len(d)), first]
    rows = np.nonzero(hit)[0]
    if rows.size == 0:
        return t_best
    lo = steps[first[rows] - 1]
    hi = steps[first[rows]]
    dr = d[rows]
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        mx = origin[0] + dr[:, 0] * mid
        my = origin[1] + dr[:, 1] * mid
        mz = origin[2] + dr[:, 2] * mid
        above_mid = mz > world.height(mx, my)
        lo = np.where(above_mid, mid, lo)
        hi = np.where(above_mid, hi, mid)
    t_best[idx[rows]] = 0.5 * (lo + hi)
    return t_best


def scan_lidar(
    world: World,
    sensor_pose: np.ndarray,
    lidar: LidarSpec,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Cast a full scan; returns (N, 3) points in the sensor frame.

    Rays without a surface hit inside max range are omitted. Damp patches are
    flush with the terrain and produce ordinary ground returns, so they stay
    invisible to the perception stack.
    """
    lidar.validate()
    origin = np.asarray(sensor_pose[:3, 3], dtype=float)
    if not world.contains(origin[0], origin[1]):
        raise ValueError(f"sensor pose {origin[:2]} outside world extent")
    rot = np.asarray(sensor_pose[:3, :3], dtype=float)
    dirs_sensor = ray_directions(lidar)
    dirs_world = dirs_sensor @ rot.T

    t_tree = _intersect_trees(world, origin, dirs_world, lidar.max_range)
    t_bush = _intersect_bushes(world, origin, dirs_world, lidar.max_range)
    t_terr = _intersect_terrain(world, origin, dirs_world, lidar.max_range)
    t = np.minimum(np.minimum(t_tree, t_bush), t_terr)

    hit = np.isfinite(t) & (t <= lidar.max_range)
    t = t[hit]
    if rng is not None and lidar.range_noise > 0.0:
        t = np.maximum(t + rng.normal(0.0, lidar.range_noise, size=t.shape), 0.01)
    return dirs_sensor[hit] * t[:, None]
