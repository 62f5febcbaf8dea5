"""Smooth analytic terrain: a planar tilt plus a few seeded low-frequency harmonics.

Keeping the surface analytic gives exact heights, gradients, and normals
everywhere, which the ray caster, the robot kinematics, and the test oracles
all rely on.
"""

from __future__ import annotations

import numpy as np

from .spec import TerrainSpec

_N_HARMONICS = 4


class Terrain:
    def __init__(self, spec: TerrainSpec, rng: np.random.Generator):
        spec.validate()
        self.spec = spec
        k = _N_HARMONICS
        angles = rng.uniform(0.0, 2.0 * np.pi, size=k)
        self._dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)  # (k, 2)
        self._wavelengths = spec.correlation_length * rng.uniform(0.8, 2.2, size=k)
        self._phases = rng.uniform(0.0, 2.0 * np.pi, size=k)
        weights = rng.uniform(0.5, 1.0, size=k)
        total = weights.sum()
        # normalized so the summed harmonics stay within +-amplitude
        self._amps = spec.amplitude * weights / total if total > 0 else weights * 0.0
        self._slope = np.tan(spec.mean_slope)

    def _phase_args(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        proj = (
            x[..., None] * self._dirs[:, 0] + y[..., None] * self._dirs[:, 1]
        )  # (..., k)
        return 2.0 * np.pi * proj / self._wavelengths + self._phases

    def height(self, x, y):
        args = self._phase_args(x, y)
        h = (self._amps * np.sin(args)).sum(axis=-1) + self._slope * np.asarray(x, dtype=float)
        return h if h.shape else float(h)

    def gradient(self, x, y):
        """(dH/dx, dH/dy) at the query points."""
        args = self._phase_args(x, y)
        coef = self._amps * 2.0 * np.pi / self._wavelengths * np.cos(args)
        gx = (coef * self._dirs[:, 0]).sum(axis=-1) + self._slope
        gy = (coef * self._dirs[:, 1]).sum(axis=-1)
        if gx.shape:
            return gx, gy
        return float(gx), float(gy)

    def normal(self, x, y):
        gx, gy = self.gradient(x, y)
        n = np.array([-gx, -gy, 1.0])
        return n / np.linalg.norm(n)

    def max_height_bound(self) -> float:
        """Upper bound on terrain height over x <= x_max; conservative for ray pruning."""
        return self.spec.amplitude

    def sample_grid(self, extent: tuple[float, float], resolution: float):
        """Heightfield samples over [0,w]x[0,h] inclusive of the far edge."""
        w, h = extent
        xs = np.arange(0.0, w + resolution * 0.5, resolution)
        ys = np.arange(0.0, h + resolution * 0.5, resolution)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return xs, ys, self.height(gx, gy)
