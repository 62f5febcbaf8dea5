"""Ground extraction by cloth simulation over the inverted cloud.

The cloud is flipped upside down and a particle grid settles onto it under
gravity with neighbor-spring constraints; the settled sheet, flipped back,
is the terrain. Points close to the sheet are ground.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateTerrain(RuntimeError):
    """No points ended up supporting the cloth (e.g. empty or airborne cloud)."""


@dataclass(frozen=True)
class ClothParams:
    resolution: float = 0.5          # particle grid pitch, m
    rigidness: int = 3               # spring relaxation sweeps per settle step
    gravity_step: float = 0.15       # m dropped per settle step
    max_iterations: int = 300
    convergence: float = 0.004       # m, max particle motion to declare settled
    classification_threshold: float = 0.12  # m, point-to-cloth ground label

    def validate(self):
        for name in (
            "resolution", "gravity_step", "convergence", "classification_threshold",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.rigidness < 0 or self.max_iterations < 1:
            raise ValueError("invalid iteration counts")


@dataclass
class TerrainModel:
    origin: np.ndarray              # (2,) world xy of grid corner
    resolution: float
    heights: np.ndarray             # (nx, ny)
    weights: np.ndarray             # (nx, ny) support (ground point count)

    def height_at(self, x, y):
        """Bilinear sample clamped to the grid edge."""
        fx = (np.asarray(x, dtype=float) - self.origin[0]) / self.resolution - 0.5
        fy = (np.asarray(y, dtype=float) - self.origin[1]) / self.resolution - 0.5
        nx, ny = self.heights.shape
        fx = np.clip(fx, 0.0, nx - 1.0)
        fy = np.clip(fy, 0.0, ny - 1.0)
        i0 = np.clip(np.floor(fx).astype(int), 0, nx - 2) if nx > 1 else np.zeros_like(fx, int)
        j0 = np.clip(np.floor(fy).astype(int), 0, ny - 2) if ny > 1 else np.zeros_like(fy, int)
        tx = fx - i0
        ty = fy - j0
        h = self.heights
        if nx == 1 or ny == 1:
            return h[np.minimum(i0, nx - 1), np.minimum(j0, ny - 1)]
        out = (
            h[i0, j0] * (1 - tx) * (1 - ty)
            + h[i0 + 1, j0] * tx * (1 - ty)
            + h[i0, j0 + 1] * (1 - tx) * ty
            + h[i0 + 1, j0 + 1] * tx * ty
        )
        return out


def fit_terrain_cloth(
    points: np.ndarray, params: ClothParams = ClothParams()
) -> tuple[TerrainModel, np.ndarray]:
    """Returns the terrain model and a boolean ground mask over the input points."""
    params.validate()
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise DegenerateTerrain("empty cloud")

    res = params.resolution
    min_xy = pts[:, :2].min(axis=0) - 0.5 * res
    max_xy = pts[:, :2].max(axis=0) + 0.5 * res
    nx = max(2, int(np.ceil((max_xy[0] - min_xy[0]) / res)) + 1)
    ny = max(2, int(np.ceil((max_xy[1] - min_xy[1]) / res)) + 1)

    # inverted frame: ground becomes the upper envelope the cloth rests on
    inv_z = -pts[:, 2]
    ix = np.clip(((pts[:, 0] - min_xy[0]) / res).astype(int), 0, nx - 1)
    iy = np.clip(((pts[:, 1] - min_xy[1]) / res).astype(int), 0, ny - 1)
    ceiling = np.full((nx, ny), -np.inf)
    np.maximum.at(ceiling, (ix, iy), inv_z)

    cloth = np.full((nx, ny), inv_z.max() + 1.0)
    pinned = np.zeros((nx, ny), dtype=bool)
    has_data = np.isfinite(ceiling)

    for _ in range(params.max_iterations):
        before = cloth.copy()
        # gravity
        cloth = np.where(pinned, cloth, cloth - params.gravity_step)
        # collision against the inverted surface
        hit = has_data & (cloth <= ceiling)
        cloth = np.where(hit, ceiling, cloth)
        pinned |= hit
        # internal springs: relax unpinned particles toward neighbor mean
        for _ in range(params.rigidness):
            padded = np.pad(cloth, 1, mode="edge")
            neigh = 0.25 * (
                padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2] + padded[1:-1, 2:]
            )
            relaxed = cloth + 0.5 * (neigh - cloth)
            cloth = np.where(pinned, cloth, relaxed)
            hit = has_data & (cloth < ceiling)
            cloth = np.where(hit, ceiling, cloth)
            pinned |= hit
        if np.abs(cloth - before).max() < params.convergence:
            break

    if not pinned.any():
        raise DegenerateTerrain("no points within cloth reach; cannot rest the sheet")

    heights = -cloth
    model = TerrainModel(
        origin=min_xy, resolution=res, heights=heights, weights=np.zeros((nx, ny)),
    )
    dz = np.abs(pts[:, 2] - model.height_at(pts[:, 0], pts[:, 1]))
    ground = dz <= params.classification_threshold
    if not ground.any():
        raise DegenerateTerrain("no points classified as ground")
    counts = np.zeros((nx, ny))
    np.add.at(counts, (ix[ground], iy[ground]), 1.0)
    model.weights = counts
    return model, ground
