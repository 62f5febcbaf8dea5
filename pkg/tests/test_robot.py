import math

import numpy as np
import pytest

from forestbench.geometry import Pose4
from forestbench.simworld import (
    DriftModel,
    InterventionError,
    Push,
    VelocityLimits,
    apply_intervention,
    measure_odometry,
    snap_to_terrain,
    step_robot,
)

from conftest import build_world


def test_zero_command_only_advances_clock(flat_world):
    s0 = snap_to_terrain(flat_world, 10.0, 10.0, 0.3)
    s1 = step_robot(flat_world, s0, (0.0, 0.0, 0.0), 0.1)
    assert (s1.x, s1.y, s1.yaw) == (s0.x, s0.y, s0.yaw)
    assert s1.clock == pytest.approx(0.1)


def test_forward_euler_step(flat_world):
    s0 = snap_to_terrain(flat_world, 10.0, 10.0, 0.0)
    s1 = step_robot(flat_world, s0, (1.0, 0.0, 0.0), 0.1, VelocityLimits(1.0, 0.3, 0.7))
    assert s1.x == pytest.approx(10.1)
    assert s1.y == pytest.approx(10.0)


def test_command_clamped_to_limits(flat_world):
    s0 = snap_to_terrain(flat_world, 10.0, 10.0, 0.0)
    s1 = step_robot(flat_world, s0, (99.0, -99.0, 99.0), 1.0, VelocityLimits(0.6, 0.3, 0.7))
    assert s1.x - s0.x == pytest.approx(0.6)
    assert s1.y - s0.y == pytest.approx(-0.3)
    assert s1.yaw == pytest.approx(0.7)


def test_damp_patch_traps_and_freezes():
    world = build_world(patches=[{"center": (15.0, 10.0), "radius": 1.0, "kind": "damp"}])
    state = snap_to_terrain(world, 12.0, 10.0, 0.0)
    trapped_at = None
    for _ in range(200):
        state = step_robot(world, state, (1.0, 0.0, 0.0), 0.1)
        if state.trapped:
            trapped_at = (state.x, state.y)
            break
    assert trapped_at is not None
    assert world.patch_at(*trapped_at, "damp") is not None
    for _ in range(50):
        state = step_robot(world, state, (1.0, 0.0, 0.0), 0.1)
        assert state.trapped
    assert (state.x, state.y) == trapped_at


def test_bush_patch_scales_speed():
    world = build_world(patches=[{"center": (10.0, 10.0), "radius": 2.0, "kind": "bush"}])
    inside = snap_to_terrain(world, 10.0, 10.0, 0.0)
    outside = snap_to_terrain(world, 30.0, 10.0, 0.0)
    step_in = step_robot(world, inside, (1.0, 0.0, 0.0), 0.1, bush_speed_scale=0.35)
    step_out = step_robot(world, outside, (1.0, 0.0, 0.0), 0.1, bush_speed_scale=0.35)
    assert (step_in.x - inside.x) == pytest.approx(0.35 * (step_out.x - outside.x))


def test_fine_vs_coarse_integration_on_flat_ground(flat_world):
    cmd = (0.5, 0.1, 0.4)
    fine = snap_to_terrain(flat_world, 20.0, 20.0, 0.2)
    for _ in range(10):
        fine = step_robot(flat_world, fine, cmd, 0.01)
    coarse = step_robot(flat_world, snap_to_terrain(flat_world, 20.0, 20.0, 0.2), cmd, 0.1)
    # Euler integration error is O(dt * |w| * |v| * T)
    tol = 0.1 * 0.4 * 0.6
    assert math.hypot(fine.x - coarse.x, fine.y - coarse.y) < tol
    assert abs(fine.yaw - coarse.yaw) < 1e-12


def test_terrain_attitude_follows_slope():
    world = build_world(amplitude=0.0, slope=0.2)
    uphill = snap_to_terrain(world, 10.0, 10.0, 0.0)
    assert uphill.pitch == pytest.approx(-0.2, abs=1e-6)
    across = snap_to_terrain(world, 10.0, 10.0, math.pi / 2)
    assert abs(across.pitch) < 1e-9
    assert across.roll != 0.0


def test_push_zero_is_identity_and_releases(flat_world):
    s0 = snap_to_terrain(flat_world, 10.0, 10.0, 0.0)
    s1 = apply_intervention(flat_world, s0, Push(0.0, 0.0))
    assert (s1.x, s1.y) == (s0.x, s0.y)
    assert not s1.trapped


def test_push_out_of_patch_untraps():
    world = build_world(patches=[{"center": (15.0, 10.0), "radius": 1.0, "kind": "damp"}])
    state = snap_to_terrain(world, 15.0, 10.0, 0.0, trapped=True)
    freed = apply_intervention(world, state, Push(2.0, math.pi))
    assert not freed.trapped
    assert freed.x == pytest.approx(13.0)


def test_push_beyond_extent_rejected(flat_world):
    state = snap_to_terrain(flat_world, 1.0, 10.0, 0.0)
    with pytest.raises(InterventionError):
        apply_intervention(flat_world, state, Push(2.0, math.pi))
    with pytest.raises(InterventionError):
        apply_intervention(flat_world, state, Push(9.0, 0.0), max_push=3.0)


def test_odometry_zero_drift_exact():
    delta = Pose4(1.0, 0.2, 0.05, 0.3)
    out = measure_odometry(delta, DriftModel.zero(), np.random.default_rng(0))
    assert out == delta


def test_odometry_zero_length_identity():
    rng = np.random.default_rng(0)
    out = measure_odometry(Pose4(), DriftModel(0.1, 0.1, 0.1, 0.1), rng)
    assert out == Pose4()


def test_odometry_yaw_variance_matches_model():
    sigma = 0.02
    drift = DriftModel(0.0, sigma, 0.0, 0.0)
    rng = np.random.default_rng(123)
    errs = [
        measure_odometry(Pose4(x=1.0), drift, rng).yaw for _ in range(1000)
    ]
    assert np.var(errs) == pytest.approx(sigma**2, rel=0.2)
