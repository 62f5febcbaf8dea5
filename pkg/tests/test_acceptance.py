"""Acceptance suite: every headline criterion at its stated tolerance.

Each test prints one PASS/FAIL line. The two plot-scale missions run once in
module-scoped fixtures and are shared across criteria.
"""

import json
import math
import time

import numpy as np
import pytest

from forestbench.mission import MissionSession, get_preset
from forestbench.analysis import fit_terrain_cloth
from forestbench.autonomy import compute_gdf
from forestbench.analysis import (
    fit_circle_kasa,
    fit_cylinder,
    reconstruct_frustums,
    refine_circle,
)
from forestbench.analysis.circles import CircleBand
from forestbench.metrics import compute_mdbi_mtbi, compute_segments

from gdf_oracle import dijkstra_oracle
from graph_sim import run_lawnmower_graph
from mission_configs import tiny_mission
from synth import sample_plane, sample_stem


def _result(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def m7_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("m7")
    cfg = get_preset("inventory-plot")
    cfg.output_dir = str(out)
    t0 = time.time()
    session = MissionSession(cfg)
    report = session.run()
    wall = time.time() - t0
    return session, report, wall


@pytest.fixture(scope="module")
def clean_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("clean")
    cfg = get_preset("clean-plot")
    cfg.output_dir = str(out)
    cfg.export_world_cloud = False
    session = MissionSession(cfg)
    report = session.run()
    return session, report


def _dbh_errors(session):
    truth = {
        (round(t.base[0], 3), round(t.base[1], 3)): t.diameter_at_breast_height()
        for t in session.world.trees
    }
    truth_xy = np.array([t.base[:2] for t in session.world.trees])
    truth_dbh = np.array([t.diameter_at_breast_height() for t in session.world.trees])
    errors = []
    for inst in session.inventory.trees.values():
        if inst.dbh is None:
            continue
        base = inst.base
        d = np.hypot(truth_xy[:, 0] - base[0], truth_xy[:, 1] - base[1])
        k = int(d.argmin())
        if d[k] > 1.0:
            continue
        errors.append(inst.dbh - truth_dbh[k])
    return np.array(errors)


def test_m7_reproduction(m7_run):
    session, report, wall = m7_run
    errors = _dbh_errors(session)
    within = float((np.abs(errors) <= 0.02).mean()) if len(errors) else 0.0
    checks = {
        "completes": report.completed,
        "area 0.9-1.1 ha": 0.9 <= report.area_covered_ha <= 1.1,
        ">=90 trees": report.tree_count >= 90,
        ">=80% DBH within 2cm": within >= 0.80,
        "sim time <= 25 min": report.mission_time <= 25 * 60,
        "wall <= 5 min": wall <= 300.0,
    }
    detail = (
        f"area={report.area_covered_ha:.3f} ha, trees={report.tree_count}, "
        f"dbh<=2cm={within * 100:.0f}% (n={len(errors)}), "
        f"sim={report.mission_time / 60:.1f} min, wall={wall:.0f} s"
    )
    _result("M7 reproduction at desk scale", all(checks.values()),
            detail + "; " + ", ".join(k for k, v in checks.items() if not v))


def test_coverage_rate_claims(clean_run, tmp_path_factory):
    _, clean_report = clean_run
    clean_rate = clean_report.coverage_rate_ha_per_h
    rates = {}
    for preset in ("small-plot", "compact-plot"):
        cfg = get_preset(preset)
        cfg.output_dir = str(tmp_path_factory.mktemp(preset.replace("-", "_")))
        cfg.export_world_cloud = False
        report = MissionSession(cfg).run()
        rates[preset] = report.coverage_rate_ha_per_h
    ok = (
        1.6 <= clean_rate <= 2.4
        and all(r >= 1.5 for r in rates.values())
        and clean_report.completed
    )
    _result(
        "coverage-rate claim", ok,
        f"clean-world={clean_rate:.2f} ha/h (band 1.6-2.4), "
        + ", ".join(f"{k}={v:.2f}" for k, v in rates.items()) + " (floor 1.5)",
    )


def test_metrics_identities(clean_run):
    _, report = clean_run
    assert report.interventions == 0, "clean run is intervention-free by construction"
    mdbi_exact = report.mdbi == report.distance_traveled
    mtbi_exact = report.mtbi == report.mission_time
    total = sum(s.duration for s in report.segments) + sum(
        r.duration for r in report.intervention_records
    )
    conserved = abs(total - report.mission_time) < 1e-9
    ok = mdbi_exact and mtbi_exact and conserved
    _result(
        "metrics identities", ok,
        f"MDBI==distance: {mdbi_exact}, MTBI==time: {mtbi_exact}, "
        f"durations conserve to {abs(total - report.mission_time):.2e} s",
    )


def test_metrics_identities_with_interventions(tmp_path):
    from forestbench.mission.config import InterventionPolicy

    scripted = (
        {"type": "interrupt", "at": 15.0, "data": {"cause": "safety"}},
        {"type": "push", "at": 18.0, "data": {"distance": 1.0, "heading": 0.5}},
        {"type": "resume", "at": 21.0, "data": {}},
        {"type": "interrupt", "at": 40.0, "data": {"cause": "push"}},
        {"type": "resume", "at": 44.0, "data": {}},
    )
    cfg = tiny_mission(
        out=str(tmp_path), policy=InterventionPolicy(mode="scripted", scripted=scripted)
    )
    report = MissionSession(cfg).run()
    total = sum(s.duration for s in report.segments) + sum(
        r.duration for r in report.intervention_records
    )
    ok = report.interventions == 2 and abs(total - report.mission_time) < 1e-9
    _result(
        "segment/intervention duration conservation", ok,
        f"{report.interventions} interventions, residual "
        f"{abs(total - report.mission_time):.2e} s",
    )


def test_gdf_oracle_equivalence():
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(100):
        cost = rng.uniform(0.0, 1.5, size=(20, 20))
        goal = tuple(int(v) for v in rng.integers(0, 20, size=2))
        field = compute_gdf(cost, resolution=0.25, goal_cell=goal, lethal=1.0)
        oracle = dijkstra_oracle(cost, 0.25, goal, lethal=1.0)
        if not np.array_equal(field.distance, oracle):
            mismatches += 1
    _result(
        "GDF oracle equivalence", mismatches == 0,
        f"{100 - mismatches}/100 random 20x20 grids exactly equal",
    )


def test_pose_graph_benefit():
    wins = 0
    residual_ok = True
    for seed in range(20):
        _, _, err_with, reports = run_lawnmower_graph(seed, with_loops=True)
        _, _, err_without, _ = run_lawnmower_graph(seed, with_loops=False)
        if err_with < err_without:
            wins += 1
        residual_ok &= all(r.cost_after <= r.cost_before + 1e-12 for r in reports)
    ok = wins >= 19 and residual_ok
    _result(
        "pose-graph benefit", ok,
        f"loop closures beat open-loop in {wins}/20 seeds; "
        f"residual non-increase on every optimize call: {residual_ok}",
    )


def test_cloth_filter_quality():
    rng = np.random.default_rng(99)
    worst_recall, worst_precision = 1.0, 1.0
    for slope in (0.0, 8.0, 15.0):
        plane = sample_plane(slope_deg=slope, noise=0.01, rng=rng)
        stems = [
            sample_stem(
                base=(x, y, math.tan(math.radians(slope)) * x),
                n=2000, noise=0.01, rng=rng,
            )
            for x, y in [(5.0, 6.0), (13.0, 9.0), (8.0, 15.0), (16.0, 16.0)]
        ]
        cloud = np.concatenate([plane] + stems)
        truth = np.concatenate(
            [np.ones(len(plane), bool)] + [np.zeros(len(s), bool) for s in stems]
        )
        _, pred = fit_terrain_cloth(cloud)
        recall = (pred & truth).sum() / truth.sum()
        precision = (pred & truth).sum() / max(pred.sum(), 1)
        worst_recall = min(worst_recall, recall)
        worst_precision = min(worst_precision, precision)
    ok = worst_recall >= 0.99 and worst_precision >= 0.95
    _result(
        "cloth-filter quality", ok,
        f"worst recall {worst_recall:.4f} (>=0.99), "
        f"worst precision {worst_precision:.4f} (>=0.95) over slopes 0/8/15 deg",
    )


def test_geometry_oracles():
    # circle: exact on noise-free points
    theta = np.linspace(0, 2 * math.pi, 48, endpoint=False)
    xy = np.column_stack([2.0 + 0.3 * np.cos(theta), 1.0 + 0.3 * np.sin(theta)])
    cx, cy, r = fit_circle_kasa(xy)
    cx, cy, r, rms = refine_circle(xy, cx, cy, r)
    circle_ok = (
        abs(cx - 2.0) < 1e-9 and abs(cy - 1.0) < 1e-9 and abs(r - 0.3) < 1e-9
    )

    # cylinder: radius within 3 mm under 5 mm noise, 100 seeds
    bad = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        pts = sample_stem(
            diameter=0.4, taper=1e-9, height=4.0, n=800, noise=0.005, rng=rng
        )
        fit = fit_cylinder(pts)
        if abs(fit.radius - 0.2) >= 0.003:
            bad += 1
    cylinder_ok = bad == 0

    # frustum volume: closed form
    circles = [
        CircleBand(0.0, 0.0, 0.0, 0.2, 0.0, 360.0, 10),
        CircleBand(1.0, 0.4, -0.1, 0.1, 0.0, 360.0, 10),
    ]
    vol = reconstruct_frustums(circles)[0].volume
    frustum_ok = abs(vol - math.pi * (0.04 + 0.02 + 0.01) / 3.0) < 1e-9

    ok = circle_ok and cylinder_ok and frustum_ok
    _result(
        "geometry oracles", ok,
        f"circle exact: {circle_ok}, cylinder within 3mm in 100/100 seeds: "
        f"{cylinder_ok} ({bad} failures), frustum closed-form to 1e-9: {frustum_ok}",
    )


def test_determinism_byte_identical(tmp_path):
    out = tmp_path / "run"
    cfg = tiny_mission(seed=9, out=str(out))
    MissionSession(tiny_mission(seed=9, out=str(out))).run()
    first = (out / "report.json").read_bytes()
    (out / "report_first.json").write_bytes(first)
    MissionSession(tiny_mission(seed=9, out=str(out))).run()
    second = (out / "report.json").read_bytes()
    ok = first == second
    _result(
        "determinism", ok,
        f"identical config+seed run twice: report JSON byte-identical "
        f"({len(first)} bytes)",
    )
