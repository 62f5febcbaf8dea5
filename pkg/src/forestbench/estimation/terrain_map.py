"""Robot-centered 2.5D elevation window with a lowest-band update rule.

Cell elevations track the lowest surface seen (ground), not canopy or trunk
points above it: incoming heights far above the stored estimate are ignored,
slightly lower ones are blended, and clearly lower ones replace the cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class TerrainMap:
    resolution: float = 0.1
    window: float = 20.0          # m, square side
    band: float = 0.2             # m, blending band around the stored elevation
    alpha: float = 0.3            # EMA weight for in-band updates

    def __post_init__(self):
        self.cells = int(round(self.window / self.resolution))
        self.elevation = np.zeros((self.cells, self.cells))
        self.known = np.zeros((self.cells, self.cells), dtype=bool)
        self.origin = np.array([0.0, 0.0])  # world coords of cell (0, 0) corner

    def recenter(self, x: float, y: float) -> None:
        """Slide the window so (x, y) is at its center, keeping overlap."""
        new_origin = np.array(
            [
                (math.floor(x / self.resolution) - self.cells // 2) * self.resolution,
                (math.floor(y / self.resolution) - self.cells // 2) * self.resolution,
            ]
        )
        shift = np.round((new_origin - self.origin) / self.resolution).astype(int)
        if shift[0] == 0 and shift[1] == 0:
            return
        elev = np.zeros_like(self.elevation)
        known = np.zeros_like(self.known)
        sx, sy = int(shift[0]), int(shift[1])
        src_x = slice(max(0, sx), min(self.cells, self.cells + sx))
        dst_x = slice(max(0, -sx), min(self.cells, self.cells - sx))
        src_y = slice(max(0, sy), min(self.cells, self.cells + sy))
        dst_y = slice(max(0, -sy), min(self.cells, self.cells - sy))
        elev[dst_x, dst_y] = self.elevation[src_x, src_y]
        known[dst_x, dst_y] = self.known[src_x, src_y]
        self.elevation = elev
        self.known = known
        self.origin = self.origin + np.array([sx, sy]) * self.resolution

    def cell_of(self, x, y):
        ix = np.floor((np.asarray(x) - self.origin[0]) / self.resolution).astype(int)
        iy = np.floor((np.asarray(y) - self.origin[1]) / self.resolution).astype(int)
        return ix, iy

    def cell_center(self, ix, iy):
        return (
            self.origin[0] + (np.asarray(ix) + 0.5) * self.resolution,
            self.origin[1] + (np.asarray(iy) + 0.5) * self.resolution,
        )

    def insert(self, points_world: np.ndarray) -> None:
        pts = np.asarray(points_world, dtype=float).reshape(-1, 3)
        if len(pts) == 0:
            return
        ix, iy = self.cell_of(pts[:, 0], pts[:, 1])
        inside = (ix >= 0) & (ix < self.cells) & (iy >= 0) & (iy < self.cells)
        ix, iy, z = ix[inside], iy[inside], pts[inside, 2]
        if len(z) == 0:
            return
        flat = ix * self.cells + iy
        # lowest incoming height per touched cell
        order = np.argsort(flat, kind="stable")
        flat_sorted = flat[order]
        z_sorted = z[order]
        uniq, start = np.unique(flat_sorted, return_index=True)
        zmin = np.minimum.reduceat(z_sorted, start)
        ux, uy = uniq // self.cells, uniq % self.cells

        cur = self.elevation[ux, uy]
        is_known = self.known[ux, uy]
        lower = zmin < cur - self.band
        in_band = ~lower & (zmin <= cur + self.band)
        new_elev = np.where(
            ~is_known | lower,
            zmin,
            np.where(in_band, (1.0 - self.alpha) * cur + self.alpha * zmin, cur),
        )
        self.elevation[ux, uy] = new_elev
        self.known[ux, uy] = True

    def known_fraction(self) -> float:
        return float(self.known.mean())
