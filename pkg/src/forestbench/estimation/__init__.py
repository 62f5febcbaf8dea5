from .pose_graph import (
    DEFAULT_LOOP_INFO,
    DEFAULT_ODOM_INFO,
    LOOP,
    ODOMETRY,
    GraphEdge,
    GraphNode,
    OptimizeReport,
    PoseGraph,
    optimize_graph,
)
from .loops import RegistrationModel, detect_loop_closures
from .payloads import DataPayload, PayloadAccumulator
from .terrain_map import TerrainMap

__all__ = [
    "DEFAULT_LOOP_INFO",
    "DEFAULT_ODOM_INFO",
    "DataPayload",
    "GraphEdge",
    "GraphNode",
    "LOOP",
    "ODOMETRY",
    "OptimizeReport",
    "PayloadAccumulator",
    "PoseGraph",
    "RegistrationModel",
    "TerrainMap",
    "detect_loop_closures",
    "optimize_graph",
]
