"""Reactive command generation: descend the geodesic field toward the goal."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from ..geometry import wrap_angle
from ..simworld.robot import VelocityLimits
from .gdf import GeodesicField

GOAL_REACHED = "goal_reached"
LOCAL_MINIMUM = "local_minimum"

GOAL_TOLERANCE = 0.3   # m
SLOW_RADIUS = 1.2      # m, forward speed ramps down inside this
YAW_GAIN = 1.8


def _descent_direction(field: GeodesicField, i: int, j: int) -> tuple[float, float] | None:
    """Direction toward the lowest neighboring field value, None at a minimum."""
    n, m = field.distance.shape
    best = field.distance[i, j]
    best_dir = None
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            a, b = i + di, j + dj
            if 0 <= a < n and 0 <= b < m and field.distance[a, b] < best:
                best = field.distance[a, b]
                best_dir = (di, dj)
    if best_dir is None:
        return None
    norm = math.hypot(*best_dir)
    return (best_dir[0] / norm, best_dir[1] / norm)


def _interpolated_gradient(field: GeodesicField, x: float, y: float):
    """Negative gradient of the field by central differences of bilinear samples."""
    res = field.resolution

    def sample(px: float, py: float) -> float:
        fx = (px - field.origin[0]) / res - 0.5
        fy = (py - field.origin[1]) / res - 0.5
        i0, j0 = int(math.floor(fx)), int(math.floor(fy))
        tx, ty = fx - i0, fy - j0
        vals = np.empty((2, 2))
        for a in (0, 1):
            for b in (0, 1):
                ii, jj = i0 + a, j0 + b
                if not field.in_bounds(ii, jj) or not np.isfinite(field.distance[ii, jj]):
                    return math.inf
                vals[a, b] = field.distance[ii, jj]
        return float(
            vals[0, 0] * (1 - tx) * (1 - ty)
            + vals[1, 0] * tx * (1 - ty)
            + vals[0, 1] * (1 - tx) * ty
            + vals[1, 1] * tx * ty
        )

    h = 0.5 * res
    fx1, fx0 = sample(x + h, y), sample(x - h, y)
    fy1, fy0 = sample(x, y + h), sample(x, y - h)
    if not all(map(math.isfinite, (fx0, fx1, fy0, fy1))):
        return None
    gx = (fx1 - fx0) / (2 * h)
    gy = (fy1 - fy0) / (2 * h)
    norm = math.hypot(gx, gy)
    if norm < 1e-9:
        return None
    return (-gx / norm, -gy / norm)


def compute_velocity_command(
    field: GeodesicField,
    x: float,
    y: float,
    yaw: float,
    goal_xy: tuple[float, float],
    limits: VelocityLimits = VelocityLimits(),
) -> tuple[tuple[float, float, float], str | None]:
    """(vx, vy, yaw_rate) plus an optional goal_reached/local_minimum signal."""
    dist_goal = math.hypot(goal_xy[0] - x, goal_xy[1] - y)
    if dist_goal <= GOAL_TOLERANCE:
        return (0.0, 0.0, 0.0), GOAL_REACHED

    i, j = field.cell_of(x, y)
    if not field.in_bounds(i, j) or not field.reachable[i, j]:
        return (0.0, 0.0, 0.0), LOCAL_MINIMUM

    direction = _interpolated_gradient(field, x, y)
    if direction is None:
        direction = _descent_direction(field, i, j)
    if direction is None:
        # at the goal cell but not within tolerance: head straight for it
        if dist_goal > 2.0 * field.resolution:
            return (0.0, 0.0, 0.0), LOCAL_MINIMUM
        direction = ((goal_xy[0] - x) / dist_goal, (goal_xy[1] - y) / dist_goal)

    desired = math.atan2(direction[1], direction[0])
    err = wrap_angle(desired - yaw)
    yaw_rate = float(np.clip(YAW_GAIN * err, -limits.yaw_rate, limits.yaw_rate))
    speed_scale = max(0.0, math.cos(err)) * min(1.0, dist_goal / SLOW_RADIUS)
    vx = limits.vx * speed_scale
    return (vx, 0.0, yaw_rate), None


def check_progress(history, window: float, min_progress: float) -> str:
    """'unreachable' when distance-to-goal shrank less than min_progress
    over the window; 'reachable' otherwise (or with insufficient history)."""
    if not history:
        return "reachable"
    t_now, d_now = history[-1]
    baseline = None
    for t, d in history:
        if t_now - t <= window:
            baseline = d
            break
    if baseline is None or (t_now - history[0][0]) < window:
        return "reachable"
    return "unreachable" if (baseline - d_now) < min_progress else "reachable"


@dataclass
class ProgressMonitor:
    window: float = 15.0
    min_progress: float = 0.5

    def __post_init__(self):
        self._history: deque[tuple[float, float]] = deque()

    def reset(self):
        self._history.clear()

    def update(self, t: float, distance_to_goal: float) -> str:
        self._history.append((t, distance_to_goal))
        while self._history and t - self._history[0][0] > 2.0 * self.window:
            self._history.popleft()
        return check_progress(list(self._history), self.window, self.min_progress)
