"""Point-body robot kinematics: planar unicycle with sideslip, terrain-snapped."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from ..geometry import wrap_angle
from .world import World

HIP_HEIGHT = 0.5  # m, body origin above the ground contact


@dataclass(frozen=True)
class VelocityLimits:
    vx: float = 0.6       # m/s forward
    vy: float = 0.3       # m/s lateral
    yaw_rate: float = 0.7  # rad/s

    def clamp(self, cmd) -> tuple[float, float, float]:
        vx, vy, wz = cmd
        return (
            float(np.clip(vx, -self.vx, self.vx)),
            float(np.clip(vy, -self.vy, self.vy)),
            float(np.clip(wz, -self.yaw_rate, self.yaw_rate)),
        )


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    yaw: float
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    vx: float = 0.0
    vy: float = 0.0
    yaw_rate: float = 0.0
    trapped: bool = False
    clock: float = 0.0

    def pose_matrix(self) -> np.ndarray:
        """World-from-body transform including terrain roll/pitch."""
        cy, sy = math.cos(self.yaw), math.sin(self.yaw)
        cp, sp = math.cos(self.pitch), math.sin(self.pitch)
        cr, sr = math.cos(self.roll), math.sin(self.roll)
        rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
        ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
        rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
        m = np.eye(4)
        m[:3, :3] = rz @ ry @ rx
        m[:3, 3] = (self.x, self.y, self.z)
        return m


def _terrain_attitude(world: World, x: float, y: float, yaw: float):
    """(z, roll, pitch) with the body z-axis on the local surface normal."""
    gx, gy = world.terrain.gradient(x, y)
    slope_fwd = gx * math.cos(yaw) + gy * math.sin(yaw)
    slope_lat = -gx * math.sin(yaw) + gy * math.cos(yaw)
    pitch = -math.atan(slope_fwd)
    roll = math.atan(slope_lat * math.cos(pitch))
    z = world.height(x, y) + HIP_HEIGHT
    return z, roll, pitch


def snap_to_terrain(world: World, x: float, y: float, yaw: float, **kwargs) -> RobotState:
    z, roll, pitch = _terrain_attitude(world, x, y, yaw)
    return RobotState(x=x, y=y, yaw=yaw, z=z, roll=roll, pitch=pitch, **kwargs)


def step_robot(
    world: World,
    state: RobotState,
    cmd,
    dt: float,
    limits: VelocityLimits = VelocityLimits(),
    bush_speed_scale: float = 0.35,
) -> RobotState:
    """Advance one Euler step; damp patches trap, bush patches slow."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    vx, vy, wz = limits.clamp(cmd)
    if state.trapped:
        return replace(state, vx=vx, vy=vy, yaw_rate=wz, clock=state.clock + dt)

    scale = bush_speed_scale if world.patch_at(state.x, state.y, "bush") else 1.0
    c, s = math.cos(state.yaw), math.sin(state.yaw)
    nx = state.x + dt * scale * (vx * c - vy * s)
    ny = state.y + dt * scale * (vx * s + vy * c)
    nyaw = wrap_angle(state.yaw + dt * wz)
    w, h = world.extent
    nx = float(np.clip(nx, 0.0, w))
    ny = float(np.clip(ny, 0.0, h))
    z, roll, pitch = _terrain_attitude(world, nx, ny, nyaw)
    trapped = world.patch_at(nx, ny, "damp") is not None
    return RobotState(
        x=nx, y=ny, yaw=nyaw, z=z, roll=roll, pitch=pitch,
        vx=vx, vy=vy, yaw_rate=wz, trapped=trapped, clock=state.clock + dt,
    )


@dataclass(frozen=True)
class Push:
    distance: float
    heading: float  # rad, world frame


class InterventionError(ValueError):
    pass


def apply_intervention(
    world: World,
    state: RobotState,
    action: Push | str,
    max_push: float = 3.0,
) -> RobotState:
    """Operator override: displace the robot or release it in place.

    Trapped is re-evaluated at the final position, so pushing out of a damp
    patch (or releasing outside one) restores mobility.
    """
    if isinstance(action, Push):
        if abs(action.distance) > max_push:
            raise InterventionError(
                f"push of {action.distance:.2f} m exceeds the {max_push:.2f} m limit"
            )
        nx = state.x + action.distance * math.cos(action.heading)
        ny = state.y + action.distance * math.sin(action.heading)
        if not world.contains(nx, ny):
            raise InterventionError(f"push target ({nx:.2f}, {ny:.2f}) outside world extent")
    elif action == "release":
        nx, ny = state.x, state.y
    else:
        raise InterventionError(f"unknown intervention action {action!r}")
    z, roll, pitch = _terrain_attitude(world, nx, ny, state.yaw)
    trapped = world.patch_at(nx, ny, "damp") is not None
    return replace(
        state, x=nx, y=ny, z=z, roll=roll, pitch=pitch,
        vx=0.0, vy=0.0, yaw_rate=0.0, trapped=trapped,
    )
