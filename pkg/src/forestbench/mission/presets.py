"""Ready-made mission configurations at the campaign scales used for evaluation."""

from __future__ import annotations

from ..simworld.spec import LidarSpec, ObstacleSpec, TerrainSpec, TreeSpec, WorldSpec
from .config import InterventionPolicy, MissionConfig, SurveyConfig


def _rect(x0, y0, w, h):
    return ((x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h))


def wide_fov_lidar() -> LidarSpec:
    """Wide-vertical-FOV unit used for inventory missions (desk-scale ray counts)."""
    return LidarSpec(
        vertical_fov=104.0, channels=24, horizontal_resolution=2.0,
        max_range=20.0, effective_range=15.0, range_noise=0.01, scan_rate=1.0,
    )


def narrow_fov_lidar() -> LidarSpec:
    """Narrow-FOV spinning unit as used in the early autonomy campaigns."""
    return LidarSpec(
        vertical_fov=30.0, channels=16, horizontal_resolution=2.0,
        max_range=25.0, effective_range=15.0, range_noise=0.01, scan_rate=1.0,
    )


def inventory_plot_mission(seed: int = 1) -> MissionConfig:
    """Large inventory plot: 100 trees on 125 x 30 m, obstacles, rescue policy."""
    world = WorldSpec(
        extent=(151.0, 56.0),
        terrain=TerrainSpec(amplitude=0.5, correlation_length=22.0, mean_slope=0.0),
        trees=TreeSpec(
            count=100, min_spacing=2.5,
            base_diameter_range=(0.18, 0.46),
            taper_rate=0.012, height_range=(9.0, 22.0), lean_max=0.05,
        ),
        obstacles=(
            ObstacleSpec(count=6, radius_range=(0.8, 1.8), kind="bush"),
            ObstacleSpec(count=2, radius_range=(1.0, 2.0), kind="damp"),
        ),
        tree_region=(13.0, 13.0, 138.0, 43.0),
        seed=seed,
    )
    survey = SurveyConfig(
        polygon=_rect(10.0, 10.0, 131.0, 36.0),
        row_spacing=7.6, waypoint_spacing=10.0, sweep_heading=0.0,
    )
    return MissionConfig(
        world=world, survey=survey, lidar=wide_fov_lidar(),
        policy=InterventionPolicy(mode="rescue"),
        seed=seed, max_sim_time=1800.0,
    )


def clean_plot_mission(seed: int = 2) -> MissionConfig:
    """Same plot scale with no obstacles: the clean-world coverage-rate case."""
    world = WorldSpec(
        extent=(151.0, 56.0),
        terrain=TerrainSpec(amplitude=0.4, correlation_length=24.0, mean_slope=0.0),
        trees=TreeSpec(
            count=80, min_spacing=2.8,
            base_diameter_range=(0.2, 0.45),
            taper_rate=0.012, height_range=(9.0, 20.0), lean_max=0.04,
        ),
        obstacles=(),
        tree_region=(13.0, 13.0, 138.0, 43.0),
        seed=seed,
    )
    survey = SurveyConfig(
        polygon=_rect(13.0, 13.0, 125.0, 30.0),
        row_spacing=6.0, waypoint_spacing=10.0, sweep_heading=0.0,
    )
    return MissionConfig(
        world=world, survey=survey, lidar=wide_fov_lidar(),
        policy=InterventionPolicy(mode="rescue"),
        seed=seed, max_sim_time=1800.0,
    )


def small_plot_mission(seed: int = 3) -> MissionConfig:
    """40 x 25 m plot, the smallest full-mission scale used in early campaigns."""
    world = WorldSpec(
        extent=(66.0, 51.0),
        terrain=TerrainSpec(amplitude=0.5, correlation_length=18.0, mean_slope=0.0),
        trees=TreeSpec(count=28, min_spacing=2.5, taper_rate=0.012),
        obstacles=(ObstacleSpec(count=2, radius_range=(0.7, 1.2), kind="bush"),),
        tree_region=(13.0, 13.0, 53.0, 38.0),
        seed=seed,
    )
    survey = SurveyConfig(
        polygon=_rect(13.0, 13.0, 40.0, 25.0),
        row_spacing=7.5, waypoint_spacing=10.0,
    )
    return MissionConfig(
        world=world, survey=survey, lidar=narrow_fov_lidar(),
        policy=InterventionPolicy(mode="rescue"),
        seed=seed, max_sim_time=1200.0,
    )


def compact_plot_mission(seed: int = 4) -> MissionConfig:
    """20 x 20 m sloped clearing, quick end-to-end runs."""
    world = WorldSpec(
        extent=(46.0, 46.0),
        terrain=TerrainSpec(amplitude=0.4, correlation_length=16.0, mean_slope=0.03),
        trees=TreeSpec(count=12, min_spacing=2.6, taper_rate=0.012),
        obstacles=(),
        tree_region=(13.0, 13.0, 33.0, 33.0),
        seed=seed,
    )
    survey = SurveyConfig(
        polygon=_rect(13.0, 13.0, 20.0, 20.0),
        row_spacing=7.0, waypoint_spacing=8.0,
    )
    return MissionConfig(
        world=world, survey=survey, lidar=wide_fov_lidar(),
        policy=InterventionPolicy(mode="rescue"),
        seed=seed, max_sim_time=900.0,
    )


PRESETS = {
    "inventory-plot": inventory_plot_mission,
    "clean-plot": clean_plot_mission,
    "small-plot": small_plot_mission,
    "compact-plot": compact_plot_mission,
}


def get_preset(name: str, seed: int | None = None) -> MissionConfig:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    cfg = PRESETS[name]() if seed is None else PRESETS[name](seed)
    cfg.validate()
    return cfg
