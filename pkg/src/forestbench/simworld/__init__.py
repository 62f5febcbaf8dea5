from .spec import DriftModel, LidarSpec, ObstacleSpec, TerrainSpec, TreeSpec, WorldSpec
from .terrain import Terrain
from .world import (
    BUSH_DOME_HEIGHT,
    GroundTruthTree,
    Patch,
    PlacementExhausted,
    World,
    generate_world,
)
from .lidar import ray_directions, scan_lidar
from .robot import (
    HIP_HEIGHT,
    InterventionError,
    Push,
    RobotState,
    VelocityLimits,
    apply_intervention,
    snap_to_terrain,
    step_robot,
)
from .odometry import measure_odometry

__all__ = [
    "BUSH_DOME_HEIGHT",
    "DriftModel",
    "GroundTruthTree",
    "HIP_HEIGHT",
    "InterventionError",
    "LidarSpec",
    "ObstacleSpec",
    "Patch",
    "PlacementExhausted",
    "Push",
    "RobotState",
    "Terrain",
    "TerrainSpec",
    "TreeSpec",
    "VelocityLimits",
    "World",
    "WorldSpec",
    "apply_intervention",
    "generate_world",
    "measure_odometry",
    "ray_directions",
    "scan_lidar",
    "snap_to_terrain",
    "step_robot",
]
