"""Mission configuration: everything a run needs, JSON-serializable and seeded."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..autonomy.traversability import CostParams, TraversabilityThresholds
from ..simworld.spec import DriftModel, LidarSpec, WorldSpec


@dataclass(frozen=True)
class SurveyConfig:
    polygon: tuple[tuple[float, float], ...]
    row_spacing: float = 7.5
    waypoint_spacing: float = 10.0
    sweep_heading: float = 0.0


@dataclass(frozen=True)
class RobotConfig:
    max_vx: float = 0.55
    max_vy: float = 0.3
    max_yaw_rate: float = 0.7
    hip_height: float = 0.5
    sensor_offset: float = 0.3     # sensor above the hip, along body z
    bush_speed_scale: float = 0.35


@dataclass(frozen=True)
class EstimationConfig:
    node_spacing: float = 2.0
    payload_travel: float = 20.0
    payload_voxel: float = 0.05
    mapping_range: float = 12.0       # m; payload clouds keep closer returns only
    terrain_window: float = 20.0
    terrain_resolution: float = 0.1
    loop_band: tuple[float, float] = (10.0, 15.0)
    loop_exclude_recent: int = 10
    optimize_every_nodes: int = 10
    reindex_min_delta: float = 0.01   # m; skip reindex below this pose change


@dataclass(frozen=True)
class PlannerConfig:
    lethal_cost: float = 0.9
    gdf_period: float = 5.0          # s between field refreshes
    progress_window: float = 15.0
    progress_min: float = 0.5
    blacklist_radius: float = 1.2    # no-go disk stamped after a rescue


@dataclass(frozen=True)
class InterventionPolicy:
    mode: str = "off"                # off | rescue | scripted
    rescue_delay: float = 15.0       # s trapped before the operator frees it
    push_distance: float = 2.0
    scripted: tuple[dict, ...] = ()  # wire-style commands with "at" times

    def validate(self):
        if self.mode not in ("off", "rescue", "scripted"):
            raise ValueError(f"unknown intervention mode {self.mode!r}")


@dataclass
class MissionConfig:
    world: WorldSpec
    survey: SurveyConfig
    lidar: LidarSpec = field(default_factory=LidarSpec)
    drift: DriftModel = field(default_factory=DriftModel)
    cost: CostParams = field(default_factory=CostParams)
    thresholds: TraversabilityThresholds = field(default_factory=TraversabilityThresholds)
    robot: RobotConfig = field(default_factory=RobotConfig)
    estimation: EstimationConfig = field(default_factory=EstimationConfig)
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    policy: InterventionPolicy = field(default_factory=InterventionPolicy)
    seed: int = 0
    tick_rate: float = 10.0
    state_message_rate: float = 5.0
    metrics_message_rate: float = 0.5
    terrain_message_rate: float = 0.5
    max_sim_time: float = 3600.0
    output_dir: str = "out"
    export_world_cloud: bool = True

    def validate(self):
        self.world.validate()
        self.lidar.validate()
        self.drift.validate()
        self.cost.validate()
        self.policy.validate()
        if self.tick_rate <= 0:
            raise ValueError("tick rate must be > 0")
        if len(self.survey.polygon) < 3:
            raise ValueError("survey polygon needs >= 3 vertices")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate

    def to_dict(self) -> dict:
        return {
            "world": self.world.to_dict(),
            "survey": asdict(self.survey),
            "lidar": asdict(self.lidar),
            "drift": asdict(self.drift),
            "cost": asdict(self.cost),
            "thresholds": asdict(self.thresholds),
            "robot": asdict(self.robot),
            "estimation": asdict(self.estimation),
            "planner": asdict(self.planner),
            "policy": asdict(self.policy),
            "seed": self.seed,
            "tick_rate": self.tick_rate,
            "state_message_rate": self.state_message_rate,
            "metrics_message_rate": self.metrics_message_rate,
            "terrain_message_rate": self.terrain_message_rate,
            "max_sim_time": self.max_sim_time,
            "output_dir": self.output_dir,
            "export_world_cloud": self.export_world_cloud,
        }

    @staticmethod
    def from_dict(d: dict) -> "MissionConfig":
        def tup(x):
            return tuple(tuple(v) if isinstance(v, (list, tuple)) else v for v in x)

        survey = d["survey"]
        cfg = MissionConfig(
            world=WorldSpec.from_dict(d["world"]),
            survey=SurveyConfig(
                polygon=tup(survey["polygon"]),
                row_spacing=survey.get("row_spacing", 7.5),
                waypoint_spacing=survey.get("waypoint_spacing", 10.0),
                sweep_heading=survey.get("sweep_heading", 0.0),
            ),
            lidar=LidarSpec(**d.get("lidar", {})),
            drift=DriftModel(**d.get("drift", {})),
            cost=CostParams(**d.get("cost", {})),
            thresholds=TraversabilityThresholds(**d.get("thresholds", {})),
            robot=RobotConfig(**d.get("robot", {})),
            estimation=EstimationConfig(
                **{
                    **d.get("estimation", {}),
                    **(
                        {"loop_band": tuple(d["estimation"]["loop_band"])}
                        if "estimation" in d and "loop_band" in d["estimation"]
                        else {}
                    ),
                }
            ),
            planner=PlannerConfig(**d.get("planner", {})),
            policy=InterventionPolicy(
                **{
                    **d.get("policy", {}),
                    **(
                        {"scripted": tuple(d["policy"]["scripted"])}
                        if "policy" in d and "scripted" in d["policy"]
                        else {}
                    ),
                }
            ),
            seed=d.get("seed", 0),
            tick_rate=d.get("tick_rate", 10.0),
            state_message_rate=d.get("state_message_rate", 5.0),
            metrics_message_rate=d.get("metrics_message_rate", 0.5),
            terrain_message_rate=d.get("terrain_message_rate", 0.5),
            max_sim_time=d.get("max_sim_time", 3600.0),
            output_dir=d.get("output_dir", "out"),
            export_world_cloud=d.get("export_world_cloud", True),
        )
        cfg.validate()
        return cfg

    @staticmethod
    def from_json(path) -> "MissionConfig":
        return MissionConfig.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
