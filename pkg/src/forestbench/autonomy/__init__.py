from .survey import PENDING, REACHED, SKIPPED, SurveyPlan, Waypoint, plan_survey
from .mission import (
    ABORTED,
    COMPLETED,
    EXECUTING,
    FINISH,
    IDLE,
    NO_ACTION,
    PAUSED,
    SAFE_STOP,
    SEND_GOAL,
    Action,
    IllegalTransition,
    MissionStateMachine,
)
from .traversability import (
    CostParams,
    TraversabilityLayer,
    TraversabilityThresholds,
    compute_cost,
    score_traversability,
)
from .gdf import GeodesicField, compute_gdf, edge_weight
from .control import (
    GOAL_REACHED,
    GOAL_TOLERANCE,
    LOCAL_MINIMUM,
    ProgressMonitor,
    check_progress,
    compute_velocity_command,
)

__all__ = [
    "ABORTED", "Action", "COMPLETED", "CostParams", "EXECUTING", "FINISH",
    "GeodesicField", "GOAL_REACHED", "GOAL_TOLERANCE", "IDLE", "IllegalTransition",
    "LOCAL_MINIMUM", "MissionStateMachine", "NO_ACTION", "PAUSED", "PENDING",
    "ProgressMonitor", "REACHED", "SAFE_STOP", "SEND_GOAL", "SKIPPED",
    "SurveyPlan", "TraversabilityLayer", "TraversabilityThresholds", "Waypoint",
    "check_progress", "compute_cost", "compute_gdf", "compute_velocity_command",
    "edge_weight", "plan_survey", "score_traversability",
]
