"""Gravity-aligned pose algebra shared by the simulator, mapper, and planner.

Poses carry 4 free degrees of freedom (x, y, z, yaw). Roll and pitch are
always observable from the terrain/IMU in this workbench, so they never
enter the estimation state; full 3D orientations appear only as 4x4
matrices built on demand (e.g. for casting sensor rays).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def wrap_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]; exact when already in range."""
    if -math.pi < a <= math.pi:
        return a
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


def wrap_angles(a: np.ndarray) -> np.ndarray:
    return (np.asarray(a) + np.pi) % (2.0 * np.pi) - np.pi


@dataclass(frozen=True)
class Pose4:
    """Gravity-aligned rigid transform: translation (x, y, z) plus yaw."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    yaw: float = 0.0

    def compose(self, other: "Pose4") -> "Pose4":
        """self * other (apply other in self's frame)."""
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return Pose4(
            self.x + c * other.x - s * other.y,
            self.y + s * other.x + c * other.y,
            self.z + other.z,
            wrap_angle(self.yaw + other.yaw),
        )

    def inverse(self) -> "Pose4":
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        return Pose4(
            -(c * self.x + s * self.y),
            -(-s * self.x + c * self.y),
            -self.z,
            wrap_angle(-self.yaw),
        )

    def delta_to(self, other: "Pose4") -> "Pose4":
        """Relative pose self^-1 * other."""
        return self.inverse().compose(other)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Transform an (N, 3) array of points into the parent frame."""
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        out = np.empty_like(pts)
        out[:, 0] = c * pts[:, 0] - s * pts[:, 1] + self.x
        out[:, 1] = s * pts[:, 0] + c * pts[:, 1] + self.y
        out[:, 2] = pts[:, 2] + self.z
        return out

    def apply_inverse(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx = pts[:, 0] - self.x
        dy = pts[:, 1] - self.y
        out = np.empty_like(pts)
        out[:, 0] = c * dx + s * dy
        out[:, 1] = -s * dx + c * dy
        out[:, 2] = pts[:, 2] - self.z
        return out

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def xyz(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def distance_to(self, other: "Pose4") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        m[0, 0], m[0, 1] = c, -s
        m[1, 0], m[1, 1] = s, c
        m[:3, 3] = (self.x, self.y, self.z)
        return m

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.yaw)

    @staticmethod
    def from_tuple(t) -> "Pose4":
        return Pose4(float(t[0]), float(t[1]), float(t[2]), float(t[3]))

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in self.as_tuple())


def rot_z(yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(pitch: float) -> np.ndarray:
    c, s = math.cos(pitch), math.sin(pitch)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_x(roll: float) -> np.ndarray:
    c, s = math.cos(roll), math.sin(roll)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def make_transform(position, yaw: float, pitch: float = 0.0, roll: float = 0.0) -> np.ndarray:
    """4x4 world-from-body transform with ZYX euler angles."""
    m = np.eye(4)
    m[:3, :3] = rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)
    m[:3, 3] = position
    return m


def transform_points(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return pts @ matrix[:3, :3].T + matrix[:3, 3]


def inverse_transform_points(matrix: np.ndarray, points: np.ndarray) -> np.ndarray:
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return (pts - matrix[:3, 3]) @ matrix[:3, :3]
