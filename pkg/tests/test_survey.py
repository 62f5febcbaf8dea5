import math

import numpy as np
import pytest

from forestbench.autonomy import SurveyPlan, plan_survey


RECT_40x25 = [(0.0, 0.0), (40.0, 0.0), (40.0, 25.0), (0.0, 25.0)]


def test_reference_rectangle_plan():
    plan = plan_survey(RECT_40x25, row_spacing=10.0, waypoint_spacing=10.0, sweep_heading=0.0)
    assert len(plan.waypoints) == 15
    ys = sorted({round(w.y, 6) for w in plan.waypoints})
    assert ys == [2.5, 12.5, 22.5]
    for y in ys:
        row = [w for w in plan.waypoints if round(w.y, 6) == y]
        assert len(row) == 5
    # serpentine: first row left-to-right, second right-to-left
    row0 = [w for w in plan.waypoints if round(w.y, 6) == 2.5]
    row1 = [w for w in plan.waypoints if round(w.y, 6) == 12.5]
    assert [w.x for w in row0] == sorted(w.x for w in row0)
    assert [w.x for w in row1] == sorted((w.x for w in row1), reverse=True)
    assert all(abs(w.heading) < 1e-9 for w in row0)
    assert all(abs(abs(w.heading) - math.pi) < 1e-9 for w in row1)


def test_single_row_polygon_is_a_line():
    narrow = [(0.0, 0.0), (30.0, 0.0), (30.0, 4.0), (0.0, 4.0)]
    plan = plan_survey(narrow, row_spacing=10.0, waypoint_spacing=5.0)
    ys = {round(w.y, 6) for w in plan.waypoints}
    assert ys == {2.0}
    xs = [w.x for w in plan.waypoints]
    assert xs == sorted(xs)


def test_rotation_equivariance():
    angle = 0.7
    c, s = math.cos(angle), math.sin(angle)
    rotated = [(c * x - s * y, s * x + c * y) for x, y in RECT_40x25]
    base = plan_survey(RECT_40x25, 10.0, 10.0, sweep_heading=0.0)
    rot = plan_survey(rotated, 10.0, 10.0, sweep_heading=angle)
    assert len(base.waypoints) == len(rot.waypoints)
    for wb, wr in zip(base.waypoints, rot.waypoints):
        ex = c * wb.x - s * wb.y
        ey = s * wb.x + c * wb.y
        assert wr.x == pytest.approx(ex, abs=1e-9)
        assert wr.y == pytest.approx(ey, abs=1e-9)
        assert math.cos(wr.heading - (wb.heading + angle)) == pytest.approx(1.0)


def test_waypoint_spacing_bound():
    plan = plan_survey(RECT_40x25, 8.0, 7.0)
    pts = np.array([(w.x, w.y) for w in plan.waypoints])
    ys = np.array([round(w.y, 6) for w in plan.waypoints])
    for y in np.unique(ys):
        row = pts[ys == y]
        gaps = np.hypot(np.diff(row[:, 0]), np.diff(row[:, 1]))
        assert (gaps <= 7.0 + 1e-9).all()


def test_row_coverage_of_polygon_interior():
    rng = np.random.default_rng(0)
    plan = plan_survey(RECT_40x25, 9.0, 9.0)
    row_ys = np.array(sorted({round(w.y, 6) for w in plan.waypoints}))
    samples = rng.uniform([0, 0], [40, 25], size=(500, 2))
    d = np.abs(samples[:, 1:2] - row_ys[None, :]).min(axis=1)
    assert d.max() <= 9.0 / 2 + 1e-6


def test_waypoints_inside_polygon():
    tri = [(0.0, 0.0), (30.0, 0.0), (15.0, 20.0)]
    plan = plan_survey(tri, 6.0, 5.0)
    from shapely.geometry import Point, Polygon

    shp = Polygon(tri).buffer(1e-9)
    assert all(shp.covers(Point(w.x, w.y)) for w in plan.waypoints)


def test_degenerate_polygon_rejected():
    with pytest.raises(ValueError):
        plan_survey([(0, 0), (1, 0)], 5.0, 5.0)
    with pytest.raises(ValueError):
        plan_survey([(0, 0), (10, 0), (10, 10), (0, 10)], 20.0, 5.0)  # > 1.5x closure radius


def test_plan_json_roundtrip(tmp_path):
    plan = plan_survey(RECT_40x25, 10.0, 10.0)
    plan.waypoints[3].status = "reached"
    path = tmp_path / "plan.json"
    plan.save(path)
    loaded = SurveyPlan.load(path)
    assert len(loaded.waypoints) == len(plan.waypoints)
    assert loaded.waypoints[3].status == "reached"
    assert loaded.row_spacing == plan.row_spacing
