"""Geodesic distance field: exact shortest paths over the weighted 8-connected grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

_SQRT2 = math.sqrt(2.0)
_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def edge_weight(resolution: float, diagonal: bool, cost_a: float, cost_b: float) -> float:
    """Step length times (1 + mean endpoint cost); shared with the test oracle."""
    length = resolution * (_SQRT2 if diagonal else 1.0)
    return length * (1.0 + 0.5 * (cost_a + cost_b))


@dataclass
class GeodesicField:
    distance: np.ndarray              # np.inf where unreachable
    reachable: np.ndarray
    goal_cell: tuple[int, int]
    resolution: float
    origin: np.ndarray = field(default_factory=lambda: np.zeros(2))
    goal_blocked: bool = False

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.resolution)),
            int(math.floor((y - self.origin[1]) / self.resolution)),
        )

    def in_bounds(self, i: int, j: int) -> bool:
        n, m = self.distance.shape
        return 0 <= i < n and 0 <= j < m


def compute_gdf(
    cost: np.ndarray,
    resolution: float,
    goal_cell: tuple[int, int],
    lethal: float = 1.0,
    origin=(0.0, 0.0),
) -> GeodesicField:
    """Exact Dijkstra cost-to-go from the goal cell.

    Cells with cost >= lethal are impassable. A goal inside a lethal cell
    yields an all-unreachable field flagged goal_blocked.
    """
    cost = np.asarray(cost, dtype=float)
    n, m = cost.shape
    gi, gj = goal_cell
    if not (0 <= gi < n and 0 <= gj < m):
        raise ValueError(f"goal cell {goal_cell} outside the {n}x{m} grid")
    passable = cost < lethal
    dist = np.full((n, m), np.inf)
    if not passable[gi, gj]:
        return GeodesicField(
            dist, np.zeros((n, m), dtype=bool), (gi, gj), resolution,
            np.asarray(origin, dtype=float), goal_blocked=True,
        )

    idx = -np.ones((n, m), dtype=np.int64)
    flat_pass = np.nonzero(passable.ravel())[0]
    idx.ravel()[flat_pass] = np.arange(len(flat_pass))
    rows, cols, vals = [], [], []
    for di, dj in _OFFSETS:
        src_i = slice(max(0, -di), min(n, n - di))
        src_j = slice(max(0, -dj), min(m, m - dj))
        dst_i = slice(max(0, di), min(n, n + di))
        dst_j = slice(max(0, dj), min(m, m + dj))
        src_ok = passable[src_i, src_j] & passable[dst_i, dst_j]
        a = idx[src_i, src_j][src_ok]
        b = idx[dst_i, dst_j][src_ok]
        ca = cost[src_i, src_j][src_ok]
        cb = cost[dst_i, dst_j][src_ok]
        length = resolution * (_SQRT2 if di != 0 and dj != 0 else 1.0)
        rows.append(a)
        cols.append(b)
        vals.append(length * (1.0 + 0.5 * (ca + cb)))
    graph = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(flat_pass), len(flat_pass)),
    )
    source = idx[gi, gj]
    d = _csgraph_dijkstra(graph, directed=False, indices=source)
    dist.ravel()[flat_pass] = d
    reachable = np.isfinite(dist)
    return GeodesicField(
        dist, reachable, (gi, gj), resolution, np.asarray(origin, dtype=float)
    )
