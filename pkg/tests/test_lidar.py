import numpy as np
import pytest

from forestbench.geometry import make_transform
from forestbench.simworld import LidarSpec, scan_lidar

from conftest import build_world


def sensor_at(world, x, y, height_above_ground):
    z = world.height(x, y) + height_above_ground
    return make_transform([x, y, z], 0.0)


def test_single_downward_channel_exact_range(flat_world):
    lidar = LidarSpec(
        vertical_fov=180.0, channels=1, horizontal_resolution=90.0,
        max_range=10.0, effective_range=10.0, range_noise=0.0,
    )
    pts = scan_lidar(flat_world, sensor_at(flat_world, 30.0, 20.0, 1.0), lidar)
    ranges = np.linalg.norm(pts, axis=1)
    assert ranges == pytest.approx(np.ones_like(ranges), abs=1e-6)


def test_grazing_ray_misses_cylinder():
    # tree 5 m ahead, offset laterally so the perpendicular distance exceeds r
    world = build_world(trees=[{"x": 35.0, "y": 20.35, "diameter": 0.3, "taper": 0.001}])
    lidar = LidarSpec(
        vertical_fov=1.0, channels=1, horizontal_resolution=360.0,
        max_range=12.0, effective_range=12.0, range_noise=0.0,
    )
    # single horizontal ray along +x from (30, 20): offset 0.35 > r=0.15
    pose = sensor_at(world, 30.0, 20.0, 1.5)
    pts = scan_lidar(world, pose, lidar)
    # terrain is the only candidate and the near-horizontal ray overshoots it
    for p in pts:
        assert np.linalg.norm(p[:2]) < 0.2 or p[0] < 4.0


def test_stem_returns_on_frustum_surface():
    world = build_world(trees=[{"x": 35.0, "y": 20.0, "diameter": 0.3, "height": 14.0}])
    tree = world.trees[0]
    lidar = LidarSpec(
        vertical_fov=60.0, channels=32, horizontal_resolution=0.5,
        max_range=20.0, effective_range=15.0, range_noise=0.0,
    )
    pose = sensor_at(world, 30.0, 20.0, 1.0)
    pts_sensor = scan_lidar(world, pose, lidar)
    pts_world = pts_sensor @ pose[:3, :3].T + pose[:3, 3]
    # keep points near the stem, clear of ground contact
    near = (
        (np.hypot(pts_world[:, 0] - 35.0, pts_world[:, 1] - 20.0) < 0.5)
        & (pts_world[:, 2] > world.height(35.0, 20.0) + 0.3)
    )
    stem_pts = pts_world[near]
    assert len(stem_pts) > 30
    assert tree.surface_distance(stem_pts).max() < 1e-3


def test_zero_noise_returns_lie_on_world_surfaces():
    world = build_world(
        amplitude=0.5,
        trees=[{"x": 33.0, "y": 21.0}, {"x": 28.0, "y": 17.0, "diameter": 0.4}],
        patches=[{"center": (30.0, 24.0), "radius": 1.5, "kind": "bush"}],
        seed=11,
    )
    lidar = LidarSpec(
        vertical_fov=40.0, channels=8, horizontal_resolution=3.0,
        max_range=18.0, effective_range=15.0, range_noise=0.0,
    )
    pose = sensor_at(world, 30.0, 20.0, 1.0)
    pts_sensor = scan_lidar(world, pose, lidar)
    pts_world = pts_sensor @ pose[:3, :3].T + pose[:3, 3]
    assert len(pts_world) > 100

    terrain_d = np.abs(pts_world[:, 2] - world.height(pts_world[:, 0], pts_world[:, 1]))
    tree_d = np.min(
        np.stack([t.surface_distance(pts_world) for t in world.trees]), axis=0
    )
    patch = world.patches[0]
    cz = world.height(*patch.center)
    u = (pts_world - np.array([patch.center[0], patch.center[1], cz])) / np.array(
        [patch.radius, patch.radius, 0.5]
    )
    bush_d = np.abs(np.linalg.norm(u, axis=1) - 1.0) * min(patch.radius, 0.5)
    best = np.minimum(np.minimum(terrain_d, tree_d), bush_d)
    assert best.max() < 1e-6


def test_noise_perturbs_along_ray(flat_world):
    lidar = LidarSpec(
        vertical_fov=30.0, channels=4, horizontal_resolution=10.0,
        max_range=20.0, effective_range=15.0, range_noise=0.02,
    )
    pose = sensor_at(flat_world, 30.0, 20.0, 1.2)
    pts = scan_lidar(flat_world, pose, lidar, np.random.default_rng(0))
    clean = scan_lidar(flat_world, pose, lidar)
    assert pts.shape == clean.shape
    dr = np.linalg.norm(pts, axis=1) - np.linalg.norm(clean, axis=1)
    assert 0.005 < dr.std() < 0.05
    # direction preserved
    cos = np.einsum("ij,ij->i", pts, clean) / (
        np.linalg.norm(pts, axis=1) * np.linalg.norm(clean, axis=1)
    )
    assert cos == pytest.approx(np.ones_like(cos), abs=1e-9)


def test_sensor_outside_extent_rejected(flat_world):
    lidar = LidarSpec()
    with pytest.raises(ValueError):
        scan_lidar(flat_world, make_transform([-5.0, 10.0, 2.0], 0.0), lidar)
