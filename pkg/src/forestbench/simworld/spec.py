"""Configuration records for the synthetic world, sensor, and drift models."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path


@dataclass(frozen=True)
class TerrainSpec:
    amplitude: float = 0.6          # peak height of the undulation, m
    correlation_length: float = 18.0  # horizontal wavelength scale, m
    mean_slope: float = 0.0         # planar tilt along +x, rad

    def validate(self):
        if self.amplitude < 0:
            raise ValueError("terrain amplitude must be >= 0")
        if self.correlation_length <= 0:
            raise ValueError("terrain correlation length must be > 0")


@dataclass(frozen=True)
class TreeSpec:
    count: int = 100
    min_spacing: float = 2.5        # m, pairwise
    base_diameter_range: tuple[float, float] = (0.15, 0.45)
    taper_rate: float = 0.012       # diameter loss per meter of height
    height_range: tuple[float, float] = (8.0, 22.0)
    lean_max: float = 0.05          # rad

    def validate(self):
        lo, hi = self.base_diameter_range
        if not (0 < lo <= hi):
            raise ValueError("base diameter range must be positive and ordered")
        if self.min_spacing <= hi:
            raise ValueError("min spacing must exceed the largest base diameter")
        if self.taper_rate <= 0:
            raise ValueError("taper rate must be > 0 so diameter strictly decreases")
        h0, h1 = self.height_range
        if not (0 < h0 <= h1):
            raise ValueError("height range must be positive and ordered")
        if self.count < 0:
            raise ValueError("tree count must be >= 0")


@dataclass(frozen=True)
class ObstacleSpec:
    count: int = 0
    radius_range: tuple[float, float] = (0.8, 2.0)
    kind: str = "bush"              # "bush" slows, "damp" traps

    def validate(self):
        if self.kind not in ("bush", "damp"):
            raise ValueError(f"unknown obstacle kind {self.kind!r}")
        lo, hi = self.radius_range
        if not (0 < lo <= hi):
            raise ValueError("obstacle radius range must be positive and ordered")


@dataclass(frozen=True)
class WorldSpec:
    extent: tuple[float, float] = (60.0, 40.0)   # world rectangle, origin (0,0)
    terrain: TerrainSpec = field(default_factory=TerrainSpec)
    trees: TreeSpec = field(default_factory=TreeSpec)
    obstacles: tuple[ObstacleSpec, ...] = ()
    tree_region: tuple[float, float, float, float] | None = None  # x0,y0,x1,y1
    seed: int = 0

    def validate(self):
        w, h = self.extent
        if w <= 0 or h <= 0:
            raise ValueError("world extent must be positive")
        self.terrain.validate()
        self.trees.validate()
        for obs in self.obstacles:
            obs.validate()
        if self.tree_region is not None:
            x0, y0, x1, y1 = self.tree_region
            if not (0 <= x0 < x1 <= w and 0 <= y0 < y1 <= h):
                raise ValueError("tree region must lie inside the world extent")

    def region(self) -> tuple[float, float, float, float]:
        if self.tree_region is not None:
            return self.tree_region
        return (0.0, 0.0, self.extent[0], self.extent[1])

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "WorldSpec":
        obstacles = tuple(
            ObstacleSpec(
                count=int(o["count"]),
                radius_range=tuple(o.get("radius_range", (0.8, 2.0))),
                kind=o.get("kind", "bush"),
            )
            for o in d.get("obstacles", [])
        )
        spec = WorldSpec(
            extent=tuple(d.get("extent", (60.0, 40.0))),
            terrain=TerrainSpec(**d.get("terrain", {})),
            trees=TreeSpec(
                **{
                    **d.get("trees", {}),
                    **(
                        {
                            "base_diameter_range": tuple(d["trees"]["base_diameter_range"]),
                            "height_range": tuple(d["trees"]["height_range"]),
                        }
                        if "trees" in d and "base_diameter_range" in d["trees"]
                        else {}
                    ),
                }
            ),
            obstacles=obstacles,
            tree_region=tuple(d["tree_region"]) if d.get("tree_region") else None,
            seed=int(d.get("seed", 0)),
        )
        spec.validate()
        return spec

    @staticmethod
    def from_json(path) -> "WorldSpec":
        return WorldSpec.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class LidarSpec:
    vertical_fov: float = 104.0     # deg, total
    channels: int = 24
    horizontal_resolution: float = 2.0  # deg per azimuth step
    max_range: float = 20.0         # m, hard cutoff
    effective_range: float = 15.0   # m, used for coverage and registration gates
    range_noise: float = 0.01       # m, 1-sigma along the ray
    scan_rate: float = 1.0          # Hz

    def validate(self):
        if self.vertical_fov <= 0:
            raise ValueError("vertical FOV must be > 0")
        if self.effective_range > self.max_range:
            raise ValueError("effective range must not exceed max range")
        if self.channels < 1 or self.horizontal_resolution <= 0:
            raise ValueError("invalid channel/azimuth configuration")
        if self.scan_rate <= 0:
            raise ValueError("scan rate must be > 0")


@dataclass(frozen=True)
class DriftModel:
    # calibrated to LiDAR-inertial-grade drift: uncorrected yaw bias alone
    # walks the platform meters off a 600 m reference line
    translation_per_sqrt_m: float = 0.003  # m / sqrt(m), per horizontal axis
    yaw_per_sqrt_m: float = 0.0005         # rad / sqrt(m)
    yaw_bias_per_m: float = 0.0001         # rad / m, systematic
    z_per_sqrt_m: float = 0.001            # m / sqrt(m)

    def validate(self):
        for name in ("translation_per_sqrt_m", "yaw_per_sqrt_m", "z_per_sqrt_m"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @staticmethod
    def zero() -> "DriftModel":
        return DriftModel(0.0, 0.0, 0.0, 0.0)
