"""Stem solid model: a stack of oblique cone frustums between fitted circles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circles import CircleBand


@dataclass(frozen=True)
class Frustum:
    h0: float
    h1: float
    c0: tuple[float, float]
    c1: tuple[float, float]
    r0: float
    r1: float

    @property
    def volume(self) -> float:
        # horizontal cross-sections are circles with linearly varying radius,
        # so lateral center offset does not change the integral (Cavalieri)
        h = self.h1 - self.h0
        return math.pi * h * (self.r0**2 + self.r0 * self.r1 + self.r1**2) / 3.0

    def to_dict(self):
        return {
            "h0": self.h0, "h1": self.h1,
            "c0": list(self.c0), "c1": list(self.c1),
            "r0": self.r0, "r1": self.r1,
        }


def reconstruct_frustums(circles: list[CircleBand]) -> list[Frustum]:
    """Consecutive circle pairs become frustums; heights must strictly increase."""
    if len(circles) < 2:
        raise ValueError("need at least two circles")
    heights = [c.height for c in circles]
    if any(b <= a for a, b in zip(heights, heights[1:])):
        raise ValueError("circle heights must be strictly increasing")
    return [
        Frustum(
            h0=a.height, h1=b.height,
            c0=(a.cx, a.cy), c1=(b.cx, b.cy),
            r0=a.radius, r1=b.radius,
        )
        for a, b in zip(circles, circles[1:])
    ]


def stack_volume(frustums: list[Frustum]) -> float:
    return float(np.sum([f.volume for f in frustums])) if frustums else 0.0
