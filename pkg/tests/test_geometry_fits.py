import math

import numpy as np
import pytest

from forestbench.analysis import (
    CircleBand,
    CylinderFitError,
    ReconstructionError,
    fit_circle_kasa,
    fit_circles_along_stem,
    fit_cylinder,
    reconstruct_frustums,
    refine_circle,
    stack_volume,
)

from synth import sample_stem


def test_exact_cylinder_recovered():
    pts = sample_stem(diameter=0.4, taper=1e-9, height=5.0, n=500)
    fit = fit_cylinder(pts)
    assert fit.radius == pytest.approx(0.2, abs=1e-6)
    assert fit.rms < 1e-6
    assert abs(fit.direction[2]) > 0.9999


def test_noisy_cylinder_radius_within_3mm():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        pts = sample_stem(diameter=0.4, taper=1e-9, height=4.0, n=800, noise=0.005, rng=rng)
        fit = fit_cylinder(pts)
        assert abs(fit.radius - 0.2) < 0.003
        assert fit.rms == pytest.approx(0.005, rel=0.4)


def test_tilted_cylinder_direction_recovered():
    tilt = math.radians(10.0)
    pts = sample_stem(
        diameter=0.3, taper=1e-9, height=6.0, n=1500,
        lean_angle=tilt, lean_direction=0.7,
    )
    fit = fit_cylinder(pts)
    truth = np.array(
        [math.tan(tilt) * math.cos(0.7), math.tan(tilt) * math.sin(0.7), 1.0]
    )
    truth = truth / np.linalg.norm(truth)
    angle = math.degrees(math.acos(np.clip(fit.direction @ truth, -1, 1)))
    assert angle < 1.0


def test_cylinder_preconditions():
    with pytest.raises(CylinderFitError):
        fit_cylinder(np.zeros((5, 3)))
    line = np.column_stack([np.linspace(0, 1, 50), np.zeros(50), np.zeros(50)])
    line[:, 1] = line[:, 0]  # collinear in projection
    with pytest.raises(CylinderFitError):
        fit_cylinder(line)


def test_exact_circle_to_machine_precision():
    theta = np.linspace(0, 2 * math.pi, 60, endpoint=False)
    xy = np.column_stack([1.0 + 0.15 * np.cos(theta), -2.0 + 0.15 * np.sin(theta)])
    cx, cy, r = fit_circle_kasa(xy)
    cx, cy, r, rms = refine_circle(xy, cx, cy, r)
    assert cx == pytest.approx(1.0, abs=1e-9)
    assert cy == pytest.approx(-2.0, abs=1e-9)
    assert r == pytest.approx(0.15, abs=1e-9)
    assert rms < 1e-9


def test_refinement_never_worse_than_kasa():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = rng.integers(12, 120)
        span = rng.uniform(math.pi / 3, 2 * math.pi)
        theta = rng.uniform(0, span, n)
        r_true = rng.uniform(0.05, 0.5)
        xy = np.column_stack(
            [r_true * np.cos(theta), r_true * np.sin(theta)]
        ) + rng.normal(0, 0.01, (n, 2))
        cx, cy, r = fit_circle_kasa(xy)
        kasa_rms = float(np.sqrt(np.mean((np.hypot(xy[:, 0] - cx, xy[:, 1] - cy) - r) ** 2)))
        _, _, _, rms = refine_circle(xy, cx, cy, r)
        assert rms <= kasa_rms + 1e-15


def test_tapered_stem_band_radii_match_truth():
    pts = sample_stem(diameter=0.40, taper=0.01, height=8.0, n=20000, noise=0.003)
    bands = fit_circles_along_stem(pts, band_height=0.5)
    assert len(bands) >= 10
    for band in bands:
        truth = 0.20 - 0.005 * band.height  # radius at the band center
        assert abs(band.radius - truth) < 0.005


def test_partial_arc_flagged_low_coverage():
    pts = sample_stem(
        diameter=0.3, taper=1e-6, height=2.0, n=4000,
        arc=(0.0, math.radians(120.0)), noise=0.001,
    )
    bands = fit_circles_along_stem(pts, band_height=0.5)
    assert all(b.low_coverage for b in bands)
    assert all(b.arc_deg < 130.0 for b in bands)


def test_too_few_bands_raises():
    pts = sample_stem(height=0.4, n=400)  # single band of data
    with pytest.raises(ReconstructionError):
        fit_circles_along_stem(pts, band_height=0.5)


def test_frustum_volume_closed_form():
    circles = [
        CircleBand(0.0, 0.0, 0.0, 0.2, 0.0, 360.0, 100),
        CircleBand(1.0, 0.0, 0.0, 0.1, 0.0, 360.0, 100),
    ]
    frustums = reconstruct_frustums(circles)
    expected = math.pi * 1.0 * (0.04 + 0.02 + 0.01) / 3.0
    assert frustums[0].volume == pytest.approx(expected, abs=1e-9)
    # oblique: shifting the top center leaves the volume unchanged
    circles_oblique = [
        CircleBand(0.0, 0.0, 0.0, 0.2, 0.0, 360.0, 100),
        CircleBand(1.0, 0.35, -0.2, 0.1, 0.0, 360.0, 100),
    ]
    oblique = reconstruct_frustums(circles_oblique)
    assert oblique[0].volume == pytest.approx(expected, abs=1e-12)


def test_frustum_counting_and_monotonicity():
    circles = [
        CircleBand(float(k), 0.0, 0.0, 0.3 - 0.02 * k, 0.0, 360.0, 50) for k in range(6)
    ]
    frustums = reconstruct_frustums(circles)
    assert len(frustums) == 5
    assert stack_volume(frustums) > 0
    bad = [circles[0], circles[0]]
    with pytest.raises(ValueError):
        reconstruct_frustums(bad)
