"""Incremental forest inventory: instance identity, terrain merging, traits.

Everything is anchored to pose-graph nodes: instance cloud segments and
terrain tiles move rigidly with their anchor when loop closures update the
graph, after which nearby duplicates merge.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..geometry import Pose4
from ..voxel import merge_voxel_clouds, voxel_downsample
from .circles import CircleBand, ReconstructionError, fit_circles_along_stem
from .cloth import TerrainModel
from .frustums import Frustum, reconstruct_frustums, stack_volume
from .segmentation import TreeCandidate

BREAST_HEIGHT = 1.3  # m above local terrain, forestry convention


@dataclass(frozen=True)
class AggregationParams:
    merge_radius: float = 1.0
    voxel_size: float = 0.05
    coverage_bins: int = 8
    band_height: float = 0.5
    min_band_points: int = 10
    rms_gate: float = 0.05


@dataclass
class InstanceSegment:
    anchor_node: int
    points: np.ndarray          # map frame
    base: np.ndarray            # (3,) map frame, candidate base
    observer_xy: np.ndarray     # map frame position the candidate was seen from


@dataclass
class TreeInstance:
    id: int
    segments: list[InstanceSegment] = field(default_factory=list)
    circles: list[CircleBand] = field(default_factory=list)
    frustums: list[Frustum] = field(default_factory=list)
    dbh: float | None = None
    height: float | None = None
    flags: list[str] = field(default_factory=list)
    coverage_bins: set[int] = field(default_factory=set)
    last_update_node: int = -1

    @property
    def base(self) -> np.ndarray:
        return np.mean([s.base for s in self.segments], axis=0)

    @property
    def anchor_nodes(self) -> list[int]:
        return sorted({s.anchor_node for s in self.segments})

    def cloud(self) -> np.ndarray:
        if not self.segments:
            return np.zeros((0, 3))
        return np.concatenate([s.points for s in self.segments], axis=0)

    def n_points(self) -> int:
        return int(sum(len(s.points) for s in self.segments))

    def to_dict(self) -> dict:
        base = self.base
        return {
            "id": self.id,
            "x": float(base[0]),
            "y": float(base[1]),
            "z": float(base[2]),
            "dbh": self.dbh,
            "height": self.height,
            "flags": sorted(self.flags),
            "coverage_bins": sorted(self.coverage_bins),
            "n_points": self.n_points(),
            "anchor_nodes": self.anchor_nodes,
            "circles": [c.to_dict() for c in self.circles],
            "frustums": [f.to_dict() for f in self.frustums],
            "volume": stack_volume(self.frustums) if self.frustums else None,
        }


class _SparseTerrain:
    """Confidence-weighted average of terrain tiles on a world-frame grid."""

    def __init__(self, resolution: float = 0.5):
        self.resolution = resolution
        self.cells: dict[tuple[int, int], tuple[float, float]] = {}  # (weight, height)

    def clear(self):
        self.cells.clear()

    def add_tile(self, tile: TerrainModel, anchor_pose: Pose4):
        nx, ny = tile.heights.shape
        gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        lx = tile.origin[0] + (gx + 0.5) * tile.resolution
        ly = tile.origin[1] + (gy + 0.5) * tile.resolution
        support = tile.weights > 0
        pts_local = np.stack(
            [lx[support], ly[support], tile.heights[support]], axis=1
        )
        w = tile.weights[support]
        pts_map = anchor_pose.apply(pts_local)
        ix = np.floor(pts_map[:, 0] / self.resolution).astype(int)
        iy = np.floor(pts_map[:, 1] / self.resolution).astype(int)
        for i, j, h, wt in zip(ix, iy, pts_map[:, 2], w):
            key = (int(i), int(j))
            if key in self.cells:
                w0, h0 = self.cells[key]
                self.cells[key] = (w0 + wt, (h0 * w0 + h * wt) / (w0 + wt))
            else:
                self.cells[key] = (wt, float(h))

    def height_at(self, x: float, y: float) -> float | None:
        i = int(math.floor(x / self.resolution))
        j = int(math.floor(y / self.resolution))
        best, best_d = None, None
        for di in range(-2, 3):
            for dj in range(-2, 3):
                cell = self.cells.get((i + di, j + dj))
                if cell is None:
                    continue
                d = di * di + dj * dj
                if best_d is None or d < best_d:
                    best_d, best = d, cell[1]
        return best

    def merge_weighted(self, key: tuple[int, int], weight: float, height: float):
        if key in self.cells:
            w0, h0 = self.cells[key]
            self.cells[key] = (w0 + weight, (h0 * w0 + height * weight) / (w0 + weight))
        else:
            self.cells[key] = (weight, height)


@dataclass
class _TerrainTile:
    anchor_node: int
    tile: TerrainModel


class ForestInventory:
    def __init__(self, params: AggregationParams = AggregationParams()):
        self.params = params
        self.trees: dict[int, TreeInstance] = {}
        self.terrain = _SparseTerrain()
        self.tiles: list[_TerrainTile] = []
        self.consumed_payloads: list[int] = []
        self.revision = 0
        self._next_id = 0

    # -- identity & aggregation -------------------------------------------

    def _nearest_instance(self, base_map: np.ndarray) -> TreeInstance | None:
        best, best_d = None, None
        for inst in self.trees.values():
            b = inst.base
            d = math.hypot(b[0] - base_map[0], b[1] - base_map[1])
            if d <= self.params.merge_radius and (best_d is None or d < best_d):
                best, best_d = inst, d
        return best

    def _coverage_bin(self, tree_xy, observer_xy) -> int:
        bearing = math.atan2(
            observer_xy[1] - tree_xy[1], observer_xy[0] - tree_xy[0]
        ) % (2.0 * math.pi)
        return int(bearing / (2.0 * math.pi / self.params.coverage_bins))

    def aggregate(
        self,
        candidates: list[TreeCandidate],
        payload_terrain: TerrainModel,
        anchor_node: int,
        anchor_pose: Pose4,
        payload_id: int,
        observer_xy=None,
    ) -> list[int]:
        """Fold one payload's candidates and terrain into the inventory."""
        touched: list[int] = []
        obs_map = (
            np.array([anchor_pose.x, anchor_pose.y])
            if observer_xy is None
            else np.asarray(anchor_pose.apply(np.array([[observer_xy[0], observer_xy[1], 0.0]]))[0][:2])
        )
        for cand in candidates:
            pts_map = anchor_pose.apply(cand.points)
            base_map = anchor_pose.apply(cand.base.reshape(1, 3))[0]
            inst = self._nearest_instance(base_map)
            if inst is None:
                inst = TreeInstance(id=self._next_id)
                self._next_id += 1
                self.trees[inst.id] = inst
            elif inst.segments:
                # co-register the new observation onto the instance's stem
                # axis; residual pose error would otherwise widen the rings
                shift = inst.base[:2] - base_map[:2]
                norm = math.hypot(shift[0], shift[1])
                if norm > 0.5:
                    shift = shift * (0.5 / norm)
                pts_map[:, :2] += shift
                base_map[:2] += shift
            seg = next(
                (s for s in inst.segments if s.anchor_node == anchor_node), None
            )
            if seg is None:
                inst.segments.append(
                    InstanceSegment(
                        anchor_node=anchor_node,
                        points=voxel_downsample(pts_map, self.params.voxel_size),
                        base=base_map,
                        observer_xy=obs_map.copy(),
                    )
                )
            else:
                seg.points = merge_voxel_clouds(
                    seg.points, pts_map, self.params.voxel_size
                )
            inst.coverage_bins.add(self._coverage_bin(base_map[:2], obs_map))
            inst.last_update_node = anchor_node
            touched.append(inst.id)
        self.tiles.append(_TerrainTile(anchor_node, payload_terrain))
        self.terrain.add_tile(payload_terrain, anchor_pose)
        self.consumed_payloads.append(payload_id)
        self.revision += 1
        return touched

    # -- pose updates ------------------------------------------------------

    def reindex(self, old_poses: dict[int, Pose4], new_poses: dict[int, Pose4]) -> None:
        """Rigidly move every anchored artifact by its node's pose delta, then
        merge instances whose corrected bases collide."""
        deltas: dict[int, Pose4] = {}
        for nid, old in old_poses.items():
            new = new_poses.get(nid)
            if new is not None:
                deltas[nid] = new.compose(old.inverse())
        for inst in self.trees.values():
            for seg in inst.segments:
                delta = deltas.get(seg.anchor_node)
                if delta is None:
                    continue
                seg.points = delta.apply(seg.points)
                seg.base = delta.apply(seg.base.reshape(1, 3))[0]
                obs = delta.apply(np.array([[seg.observer_xy[0], seg.observer_xy[1], 0.0]]))
                seg.observer_xy = obs[0][:2]
        self._merge_collisions()
        self._rebuild_terrain(new_poses)
        self.revision += 1

    def _merge_collisions(self):
        ids = sorted(self.trees)
        merged = True
        while merged:
            merged = False
            ids = sorted(self.trees)
            for a_i in range(len(ids)):
                for b_i in range(a_i + 1, len(ids)):
                    a, b = self.trees.get(ids[a_i]), self.trees.get(ids[b_i])
                    if a is None or b is None:
                        continue
                    pa, pb = a.base, b.base
                    if math.hypot(pa[0] - pb[0], pa[1] - pb[1]) <= self.params.merge_radius:
                        a.segments.extend(b.segments)
                        a.coverage_bins |= b.coverage_bins
                        a.flags = sorted(set(a.flags) | set(b.flags))
                        a.last_update_node = max(a.last_update_node, b.last_update_node)
                        del self.trees[b.id]
                        merged = True
        return

    def _rebuild_terrain(self, poses: dict[int, Pose4]):
        self.terrain.clear()
        for entry in self.tiles:
            pose = poses.get(entry.anchor_node)
            if pose is not None:
                self.terrain.add_tile(entry.tile, pose)

    # -- reconstruction & traits -------------------------------------------

    def normalized_cloud(self, inst: TreeInstance) -> np.ndarray | None:
        cloud = inst.cloud()
        if len(cloud) == 0:
            return None
        base = inst.base
        ground = self.terrain.height_at(float(base[0]), float(base[1]))
        if ground is None:
            ground = float(base[2])
        out = cloud.copy()
        out[:, 2] = cloud[:, 2] - ground
        return out

    def reestimate(self, ids=None) -> None:
        """Re-fit circles, frustums, and traits for the given (or all) trees."""
        targets = self.trees.values() if ids is None else [
            self.trees[i] for i in ids if i in self.trees
        ]
        for inst in targets:
            norm = self.normalized_cloud(inst)
            if norm is None:
                continue
            inst.flags = [f for f in inst.flags if f not in ("reconstruction_failed",)]
            try:
                inst.circles = fit_circles_along_stem(
                    norm,
                    band_height=self.params.band_height,
                    min_band_points=self.params.min_band_points,
                    rms_gate=self.params.rms_gate,
                )
                inst.frustums = reconstruct_frustums(inst.circles)
            except (ReconstructionError, ValueError):
                inst.circles = []
                inst.frustums = []
                inst.dbh = None
                inst.height = None
                if "reconstruction_failed" not in inst.flags:
                    inst.flags.append("reconstruction_failed")
                continue
            self._estimate_traits(inst, norm)
        self.revision += 1

    def _estimate_traits(self, inst: TreeInstance, normalized_cloud: np.ndarray) -> None:
        inst.flags = [
            f for f in inst.flags if f not in ("dbh_extrapolated", "dbh_unavailable")
        ]
        inst.height = float(normalized_cloud[:, 2].max())
        inst.dbh = None
        circles = inst.circles
        band = self.params.band_height
        hs = [c.height for c in circles]
        bh = BREAST_HEIGHT
        if hs[0] <= bh <= hs[-1]:
            hi = next(k for k in range(len(hs)) if hs[k] >= bh)
            if hs[hi] == bh:
                r = circles[hi].radius
            else:
                lo = hi - 1
                t = (bh - hs[lo]) / (hs[hi] - hs[lo])
                r = circles[lo].radius * (1.0 - t) + circles[hi].radius * t
            inst.dbh = 2.0 * r
        elif bh < hs[0] and hs[0] - bh <= band:
            c0, c1 = circles[0], circles[1]
            slope = (c1.radius - c0.radius) / (c1.height - c0.height)
            inst.dbh = 2.0 * (c0.radius + slope * (bh - c0.height))
            inst.flags.append("dbh_extrapolated")
        elif bh > hs[-1] and bh - hs[-1] <= band:
            c0, c1 = circles[-2], circles[-1]
            slope = (c1.radius - c0.radius) / (c1.height - c0.height)
            inst.dbh = 2.0 * (c1.radius + slope * (bh - c1.height))
            inst.flags.append("dbh_extrapolated")
        else:
            inst.flags.append("dbh_unavailable")

    def flag_fov_limits(self, vertical_fov_deg: float, sensor_height: float) -> None:
        """Mark trees whose observed top sits at the sensor's visibility ceiling."""
        half = math.radians(vertical_fov_deg) / 2.0
        for inst in self.trees.values():
            if inst.height is None or not inst.segments:
                continue
            base = inst.base
            ceiling = -math.inf
            for seg in inst.segments:
                d = math.hypot(
                    seg.observer_xy[0] - base[0], seg.observer_xy[1] - base[1]
                )
                ceiling = max(ceiling, sensor_height + d * math.tan(half))
            if inst.height >= ceiling - 0.75:
                if "fov_limited" not in inst.flags:
                    inst.flags.append("fov_limited")
            else:
                inst.flags = [f for f in inst.flags if f != "fov_limited"]

    # -- export --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "revision": self.revision,
            "consumed_payloads": list(self.consumed_payloads),
            "tree_count": len(self.trees),
            "trees": [self.trees[i].to_dict() for i in sorted(self.trees)],
        }

    def save_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))
