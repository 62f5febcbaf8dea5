"""Drift-corrupted relative-pose measurements standing in for LiDAR-inertial odometry."""

from __future__ import annotations

import math

import numpy as np

from ..geometry import Pose4, wrap_angle
from .spec import DriftModel


def measure_odometry(
    true_delta: Pose4, drift: DriftModel, rng: np.random.Generator
) -> Pose4:
    """Corrupt a gravity-aligned relative pose with distance-scaled noise.

    Noise standard deviations grow with sqrt(traveled distance) (random-walk
    odometry error); yaw additionally picks up a deterministic bias per meter.
    Roll/pitch stay exact, matching IMU observability.
    """
    length = math.hypot(true_delta.x, true_delta.y)
    if length == 0.0:
        return true_delta
    sqrt_len = math.sqrt(length)
    sx = drift.translation_per_sqrt_m * sqrt_len
    sz = drift.z_per_sqrt_m * sqrt_len
    syaw = drift.yaw_per_sqrt_m * sqrt_len
    nx, ny, nz, nyaw = rng.normal(0.0, 1.0, size=4)
    return Pose4(
        true_delta.x + sx * nx,
        true_delta.y + sx * ny,
        true_delta.z + sz * nz,
        wrap_angle(true_delta.yaw + drift.yaw_bias_per_m * length + syaw * nyaw),
    )
