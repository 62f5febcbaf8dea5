"""Loop-closure proposal and simulated geometric verification.

Candidates are gated on the ESTIMATED distance band; verification succeeds
only when the TRUE separation is within the sensor's usable range, standing
in for a registration step that fails without physical scan overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import Pose4, wrap_angle
from .pose_graph import DEFAULT_LOOP_INFO, PoseGraph


@dataclass(frozen=True)
class RegistrationModel:
    sigma_xy: float = 0.008     # m
    sigma_z: float = 0.008      # m
    sigma_yaw: float = 0.0015   # rad
    clip_sigmas: float = 2.0    # hard bound on each noise draw


def detect_loop_closures(
    graph: PoseGraph,
    current_id: int,
    true_poses: dict[int, Pose4],
    rng: np.random.Generator,
    radius_band: tuple[float, float] = (10.0, 15.0),
    exclude_recent: int = 10,
    effective_range: float = 15.0,
    registration: RegistrationModel = RegistrationModel(),
    info=DEFAULT_LOOP_INFO,
    max_per_query: int = 3,
) -> list[tuple[int, int, Pose4]]:
    """Propose and verify closures for the latest node; edges are appended.

    Returns the accepted (i, j, measured relative pose) triples.
    """
    if current_id != len(graph.nodes) - 1:
        raise ValueError("loop detection must run on the latest node")
    cur = graph.nodes[current_id].pose
    lo, hi = radius_band
    candidates = []
    for node in graph.nodes[: max(0, current_id - exclude_recent)]:
        d = cur.distance_to(node.pose)
        if lo <= d <= hi and not graph.has_loop_between(node.id, current_id):
            candidates.append((d, node.id))
    candidates.sort()

    accepted = []
    for _, cand_id in candidates:
        if len(accepted) >= max_per_query:
            break
        true_d = true_poses[cand_id].distance_to(true_poses[current_id])
        # verification: registration cannot succeed without scan overlap
        if true_d > effective_range:
            continue
        rel_true = true_poses[cand_id].delta_to(true_poses[current_id])
        clip = registration.clip_sigmas
        nx, ny, nz, nyaw = rng.normal(0.0, 1.0, size=4)
        rel = Pose4(
            rel_true.x + registration.sigma_xy * float(np.clip(nx, -clip, clip)),
            rel_true.y + registration.sigma_xy * float(np.clip(ny, -clip, clip)),
            rel_true.z + registration.sigma_z * float(np.clip(nz, -clip, clip)),
            wrap_angle(
                rel_true.yaw + registration.sigma_yaw * float(np.clip(nyaw, -clip, clip))
            ),
        )
        graph.add_loop_edge(cand_id, current_id, rel, info)
        accepted.append((cand_id, current_id, rel))
    return accepted
