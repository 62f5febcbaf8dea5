"""Kinematic lawnmower run used by pose-graph tests: no sensing, just drift."""

import math

import numpy as np

from forestbench.geometry import Pose4, wrap_angle
from forestbench.estimation import PoseGraph, detect_loop_closures, optimize_graph
from forestbench.simworld import DriftModel, measure_odometry


def serpentine_nodes(rows=4, row_length=60.0, row_spacing=10.0, node_spacing=2.0):
    """True node poses along a serpentine: (x, y, z=0, yaw of travel)."""
    poses = []
    for r in range(rows):
        y = r * row_spacing
        xs = np.arange(0.0, row_length + 1e-9, node_spacing)
        if r % 2 == 1:
            xs = xs[::-1]
        heading = 0.0 if r % 2 == 0 else math.pi
        for x in xs:
            poses.append(Pose4(float(x), float(y), 0.0, heading))
        if r + 1 < rows:
            # one node mid-turn to keep odometry deltas short
            x_end = xs[-1]
            poses.append(Pose4(float(x_end), y + row_spacing / 2.0, 0.0, math.pi / 2))
    return poses


def run_lawnmower_graph(
    seed: int,
    drift: DriftModel = DriftModel(
        translation_per_sqrt_m=0.01,
        yaw_per_sqrt_m=0.004,
        yaw_bias_per_m=0.002,
        z_per_sqrt_m=0.002,
    ),
    with_loops: bool = True,
    optimize_every: int = 10,
):
    """Returns (graph, true_poses, final planar error, optimize reports)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 17]))
    truth = serpentine_nodes()
    graph = PoseGraph()
    true_by_id = {}
    reports = []
    est = truth[0]
    nid = graph.add_node(est, timestamp=0.0)
    true_by_id[nid] = truth[0]
    for k in range(1, len(truth)):
        true_delta = truth[k - 1].delta_to(truth[k])
        meas = measure_odometry(true_delta, drift, rng)
        est = graph.nodes[-1].pose.compose(meas)
        nid = graph.add_node(est, odom_delta=meas, timestamp=float(k))
        true_by_id[nid] = truth[k]
        if with_loops:
            hits = detect_loop_closures(graph, nid, true_by_id, rng)
            if hits or (nid % optimize_every == 0):
                reports.append(optimize_graph(graph))
    if with_loops:
        reports.append(optimize_graph(graph))
    final_est = graph.nodes[-1].pose
    final_true = truth[-1]
    err = math.hypot(final_est.x - final_true.x, final_est.y - final_true.y)
    return graph, true_by_id, err, reports
