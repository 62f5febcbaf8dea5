from .config import (
    EstimationConfig,
    InterventionPolicy,
    MissionConfig,
    PlannerConfig,
    RobotConfig,
    SurveyConfig,
)
from .presets import PRESETS, get_preset
from .session import MissionSession

__all__ = [
    "EstimationConfig",
    "InterventionPolicy",
    "MissionConfig",
    "MissionSession",
    "PRESETS",
    "PlannerConfig",
    "RobotConfig",
    "SurveyConfig",
    "get_preset",
]
