"""Geometric traversability scoring and the cost-to-go heuristic field."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..estimation.terrain_map import TerrainMap


@dataclass(frozen=True)
class TraversabilityThresholds:
    slope_low: float = math.radians(15.0)
    slope_high: float = math.radians(35.0)
    rough_low: float = 0.03
    rough_high: float = 0.10
    step_low: float = 0.10
    step_high: float = 0.25


@dataclass(frozen=True)
class CostParams:
    w_trav: float = 1.0
    w_unkn: float = 1.0
    s_unkn: float = 0.3

    def validate(self):
        if self.w_trav < 0 or self.w_unkn < 0:
            raise ValueError("weights must be >= 0")
        if not (0.0 <= self.s_unkn <= 1.0):
            raise ValueError("unknown-cell score must be in [0, 1]")


@dataclass
class TraversabilityLayer:
    score: np.ndarray       # s in [0, 1], valid on known cells only
    known: np.ndarray
    resolution: float
    origin: np.ndarray


def _hinge(value: np.ndarray, low: float, high: float) -> np.ndarray:
    """1 below low, 0 above high, linear in between."""
    return np.clip((high - value) / (high - low), 0.0, 1.0)


def _neighborhood_stack(arr: np.ndarray) -> np.ndarray:
    """(9, n, m) stack of 3x3 shifted copies, NaN-padded at borders."""
    n, m = arr.shape
    out = np.full((9, n, m), np.nan)
    k = 0
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            src_i = slice(max(0, di), min(n, n + di))
            dst_i = slice(max(0, -di), min(n, n - di))
            src_j = slice(max(0, dj), min(m, m + dj))
            dst_j = slice(max(0, -dj), min(m, m - dj))
            out[k][dst_i, dst_j] = arr[src_i, src_j]
            k += 1
    return out


def score_traversability(
    tmap: TerrainMap, thresholds: TraversabilityThresholds = TraversabilityThresholds()
) -> TraversabilityLayer:
    """Slope, roughness, and step-height hinge penalties multiplied per cell."""
    elev = np.where(tmap.known, tmap.elevation, np.nan)
    res = tmap.resolution

    right = np.full_like(elev, np.nan)
    left = np.full_like(elev, np.nan)
    up = np.full_like(elev, np.nan)
    down = np.full_like(elev, np.nan)
    right[:-1, :] = elev[1:, :]
    left[1:, :] = elev[:-1, :]
    up[:, :-1] = elev[:, 1:]
    down[:, 1:] = elev[:, :-1]

    # central differences with one-sided fallback at unknown/border cells
    with np.errstate(invalid="ignore"):
        gx = (right - left) / (2.0 * res)
        gx = np.where(np.isnan(gx), (right - elev) / res, gx)
        gx = np.where(np.isnan(gx), (elev - left) / res, gx)
        gy = (up - down) / (2.0 * res)
        gy = np.where(np.isnan(gy), (up - elev) / res, gy)
        gy = np.where(np.isnan(gy), (elev - down) / res, gy)
    gx = np.nan_to_num(gx, nan=0.0)
    gy = np.nan_to_num(gy, nan=0.0)
    slope = np.arctan(np.hypot(gx, gy))

    hood = _neighborhood_stack(elev)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN neighborhoods
        rough = np.nanstd(hood, axis=0)
        stepv = np.nanmax(hood, axis=0) - np.nanmin(hood, axis=0)
    rough = np.nan_to_num(rough, nan=0.0)
    stepv = np.nan_to_num(stepv, nan=0.0)

    score = (
        _hinge(slope, thresholds.slope_low, thresholds.slope_high)
        * _hinge(rough, thresholds.rough_low, thresholds.rough_high)
        * _hinge(stepv, thresholds.step_low, thresholds.step_high)
    )
    score = np.where(tmap.known, np.clip(score, 0.0, 1.0), 0.0)
    return TraversabilityLayer(
        score=score,
        known=tmap.known.copy(),
        resolution=res,
        origin=tmap.origin.copy(),
    )


def compute_cost(layer: TraversabilityLayer, params: CostParams) -> np.ndarray:
    """Per-cell cost-to-go heuristic.

    Known cells pay for poor traversability; unknown cells pay the fixed
    unknown score. The two terms never mix on one cell.
    """
    params.validate()
    known_cost = params.w_trav * (1.0 - layer.score)
    unknown_cost = params.w_unkn * params.s_unkn
    return np.where(layer.known, known_cost, unknown_cost)
