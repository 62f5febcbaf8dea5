"""Dense payload accumulation: gravity-aligned clouds emitted per travel interval."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..geometry import Pose4
from ..plyio import write_ply
from ..voxel import voxel_downsample


@dataclass
class DataPayload:
    id: int
    anchor_node: int
    points: np.ndarray        # (N, 3), gravity-aligned frame of the anchor node
    distance: float           # m of travel covered by this payload
    emitted_at: float         # s

    def export(self, directory, anchor_pose: Pose4) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        ply_path = directory / f"payload_{self.id:04d}.ply"
        meta_path = directory / f"payload_{self.id:04d}.json"
        write_ply(ply_path, self.points)
        meta_path.write_text(
            json.dumps(
                {
                    "id": self.id,
                    "anchor_node": self.anchor_node,
                    "anchor_pose": list(anchor_pose.as_tuple()),
                    "distance": self.distance,
                    "emitted_at": self.emitted_at,
                    "points": int(len(self.points)),
                },
                indent=2,
            )
        )
        return ply_path, meta_path


class PayloadAccumulator:
    """Buffers scans (already placed in the odometry frame) until the travel
    threshold passes, then emits a payload anchored to a graph node.

    Anchoring uses the anchor's odometry-frame pose, so a payload later moves
    rigidly with its node when the graph is re-optimized.
    """

    def __init__(self, travel_threshold: float = 20.0, voxel_size: float = 0.05):
        self.travel_threshold = travel_threshold
        self.voxel_size = voxel_size
        self._points: list[np.ndarray] = []
        self._travel = 0.0
        self._anchor_node: int | None = None
        self._anchor_pose_odom: Pose4 | None = None
        self._next_id = 0

    @property
    def travel(self) -> float:
        return self._travel

    @property
    def has_anchor(self) -> bool:
        return self._anchor_node is not None

    def set_anchor(self, node_id: int, pose_odom: Pose4) -> None:
        """Anchor the payload under construction at its first graph node."""
        if self._anchor_node is None:
            self._anchor_node = node_id
            self._anchor_pose_odom = pose_odom

    def add_scan(self, points_odom: np.ndarray) -> None:
        pts = np.asarray(points_odom, dtype=float).reshape(-1, 3)
        if len(pts):
            self._points.append(pts)

    def add_travel(self, distance: float) -> None:
        self._travel += max(0.0, distance)

    def poll(self, now: float, force: bool = False) -> DataPayload | None:
        """Emit once travel crosses the threshold (or on force at mission end)."""
        if self._anchor_node is None:
            return None
        if not force and self._travel < self.travel_threshold:
            return None
        if not self._points:
            if force:
                self._reset()
            return None
        cloud_odom = np.concatenate(self._points, axis=0)
        local = self._anchor_pose_odom.apply_inverse(cloud_odom)
        local = voxel_downsample(local, self.voxel_size)
        payload = DataPayload(
            id=self._next_id,
            anchor_node=self._anchor_node,
            points=local,
            distance=self._travel,
            emitted_at=now,
        )
        self._next_id += 1
        self._reset()
        return payload

    def _reset(self) -> None:
        self._points = []
        self._travel = 0.0
        self._anchor_node = None
        self._anchor_pose_odom = None
