"""Deterministic voxel-grid thinning used for payload and instance clouds."""

from __future__ import annotations

import numpy as np


def voxel_keys(points: np.ndarray, leaf: float) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return np.floor(pts / leaf).astype(np.int64)


def voxel_downsample(points: np.ndarray, leaf: float) -> np.ndarray:
    """Keep the first point seen in each occupied voxel (stable, order-based)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0 or leaf <= 0:
        return pts
    keys = voxel_keys(pts, leaf)
    _, first = np.unique(keys, axis=0, return_index=True)
    return pts[np.sort(first)]


def merge_voxel_clouds(base: np.ndarray, extra: np.ndarray, leaf: float) -> np.ndarray:
    """Union of two clouds with base points winning occupied voxels."""
    base = np.asarray(base, dtype=float).reshape(-1, 3)
    extra = np.asarray(extra, dtype=float).reshape(-1, 3)
    if len(base) == 0:
        return voxel_downsample(extra, leaf)
    if len(extra) == 0:
        return base
    stacked = np.concatenate([base, extra], axis=0)
    return voxel_downsample(stacked, leaf)
