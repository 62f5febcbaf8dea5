"""Pose graph over gravity-aligned 4-DOF states with batch Gauss-Newton refinement.

Graphs at this scale (hundreds of nodes) solve in milliseconds with sparse
normal equations, so there is no incremental machinery: the optimizer runs
after loop closures and at a fixed node cadence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..geometry import Pose4, wrap_angle

ODOMETRY = "odometry"
LOOP = "loop"

DEFAULT_ODOM_INFO = (400.0, 400.0, 1000.0, 2500.0)   # (x, y, z, yaw) weights
DEFAULT_LOOP_INFO = (2500.0, 2500.0, 2500.0, 10000.0)


@dataclass
class GraphNode:
    id: int
    pose: Pose4
    scan_ref: int | None
    timestamp: float


@dataclass(frozen=True)
class GraphEdge:
    i: int
    j: int
    kind: str
    rel: Pose4
    info: tuple[float, float, float, float]


@dataclass
class OptimizeReport:
    iterations: int
    cost_before: float
    cost_after: float
    converged: bool
    damped: bool = False


class PoseGraph:
    def __init__(self):
        self.nodes: list[GraphNode] = []
        self.edges: list[GraphEdge] = []

    def __len__(self) -> int:
        return len(self.nodes)

    def add_node(
        self,
        estimate: Pose4,
        scan_ref: int | None = None,
        odom_delta: Pose4 | None = None,
        timestamp: float = 0.0,
        odom_info=DEFAULT_ODOM_INFO,
    ) -> int:
        """Append a node; all nodes after the first get one odometry edge."""
        if not estimate.is_finite():
            raise ValueError("non-finite pose estimate rejected")
        node_id = len(self.nodes)
        self.nodes.append(GraphNode(node_id, estimate, scan_ref, timestamp))
        if node_id > 0:
            if odom_delta is None:
                raise ValueError("odometry delta required for non-initial nodes")
            self.edges.append(
                GraphEdge(node_id - 1, node_id, ODOMETRY, odom_delta, tuple(odom_info))
            )
        return node_id

    def add_loop_edge(self, i: int, j: int, rel: Pose4, info=DEFAULT_LOOP_INFO) -> None:
        self.edges.append(GraphEdge(i, j, LOOP, rel, tuple(info)))

    def has_loop_between(self, i: int, j: int) -> bool:
        return any(
            e.kind == LOOP and {e.i, e.j} == {i, j} for e in self.edges
        )

    def poses(self) -> list[Pose4]:
        return [n.pose for n in self.nodes]

    def total_cost(self) -> float:
        states = np.array([n.pose.as_tuple() for n in self.nodes])
        return _cost(states, self.edges)

    def export_g2o(self, path) -> None:
        """Plain-text pose graph: SE(3) rows with yaw-only quaternions."""
        lines = []
        for n in self.nodes:
            half = 0.5 * n.pose.yaw
            lines.append(
                f"VERTEX_SE3:QUAT {n.id} {n.pose.x!r} {n.pose.y!r} {n.pose.z!r} "
                f"0 0 {math.sin(half)!r} {math.cos(half)!r}"
            )
        for e in self.edges:
            half = 0.5 * e.rel.yaw
            wx, wy, wz, wyaw = e.info
            # upper triangle of the 6x6 information matrix, row-major
            diag = [wx, wy, wz, 1e6, 1e6, wyaw]
            upper = []
            for r in range(6):
                for c in range(r, 6):
                    upper.append(diag[r] if r == c else 0.0)
            lines.append(
                f"EDGE_SE3:QUAT {e.i} {e.j} {e.rel.x!r} {e.rel.y!r} {e.rel.z!r} "
                f"0 0 {math.sin(half)!r} {math.cos(half)!r} "
                + " ".join(f"{v!r}" for v in upper)
            )
        with open(path, "w") as f:
            f.write("\n".join(lines) + "\n")


def _residuals(states: np.ndarray, edges) -> np.ndarray:
    out = np.empty(4 * len(edges))
    for k, e in enumerate(edges):
        xi, yi, zi, pi = states[e.i]
        xj, yj, zj, pj = states[e.j]
        c, s = math.cos(pi), math.sin(pi)
        dx, dy = xj - xi, yj - yi
        out[4 * k + 0] = (c * dx + s * dy) - e.rel.x
        out[4 * k + 1] = (-s * dx + c * dy) - e.rel.y
        out[4 * k + 2] = (zj - zi) - e.rel.z
        out[4 * k + 3] = wrap_angle(pj - pi - e.rel.yaw)
    return out


def _weights(edges) -> np.ndarray:
    w = np.empty(4 * len(edges))
    for k, e in enumerate(edges):
        w[4 * k : 4 * k + 4] = e.info
    return w


def _cost(states: np.ndarray, edges) -> float:
    r = _residuals(states, edges)
    return float(np.dot(_weights(edges) * r, r))


def _jacobian(states: np.ndarray, edges) -> sp.csr_matrix:
    """Sparse J for the residual vector over free states (node 0 fixed)."""
    rows, cols, vals = [], [], []

    def put(r, node, dof, v):
        if node == 0:
            return
        rows.append(r)
        cols.append(4 * (node - 1) + dof)
        vals.append(v)

    for k, e in enumerate(edges):
        xi, yi, _zi, pi = states[e.i]
        xj, yj, _zj, _pj = states[e.j]
        c, s = math.cos(pi), math.sin(pi)
        dx, dy = xj - xi, yj - yi
        r0 = 4 * k
        # d(r_x)/d*: r_x = c*dx + s*dy - m
        put(r0, e.i, 0, -c); put(r0, e.i, 1, -s)
        put(r0, e.j, 0, c); put(r0, e.j, 1, s)
        put(r0, e.i, 3, -s * dx + c * dy)
        # d(r_y)/d*: r_y = -s*dx + c*dy - m
        put(r0 + 1, e.i, 0, s); put(r0 + 1, e.i, 1, -c)
        put(r0 + 1, e.j, 0, -s); put(r0 + 1, e.j, 1, c)
        put(r0 + 1, e.i, 3, -c * dx - s * dy)
        # r_z, r_yaw
        put(r0 + 2, e.i, 2, -1.0); put(r0 + 2, e.j, 2, 1.0)
        put(r0 + 3, e.i, 3, -1.0); put(r0 + 3, e.j, 3, 1.0)
    n_free = 4 * (len(states) - 1)
    return sp.csr_matrix(
        (vals, (rows, cols)), shape=(4 * len(edges), n_free)
    )


def optimize_graph(
    graph: PoseGraph,
    max_iterations: int = 50,
    rel_tol: float = 1e-9,
) -> OptimizeReport:
    """Refine node poses in place; the total weighted cost never increases.

    Gauss-Newton steps with a Levenberg fallback: a step is only accepted if
    it lowers the cost, otherwise the damping grows until one does (or the
    iteration gives up, leaving poses at the best seen).
    """
    if len(graph.nodes) < 2 or not graph.edges:
        return OptimizeReport(0, graph.total_cost(), graph.total_cost(), True)

    states = np.array([n.pose.as_tuple() for n in graph.nodes])
    edges = graph.edges
    w = _weights(edges)
    cost = _cost(states, edges)
    cost_before = cost
    damped = False
    iterations = 0
    converged = False

    for _ in range(max_iterations):
        iterations += 1
        if cost == 0.0:
            converged = True
            break
        r = _residuals(states, edges)
        jac = _jacobian(states, edges)
        jtw = jac.T.multiply(w)
        hess = (jtw @ jac).tocsc()
        grad = jtw @ r
        lam = 0.0
        step_ok = False
        trial_cost = cost
        for _try in range(8):
            try:
                lhs = hess if lam == 0.0 else (hess + lam * sp.identity(hess.shape[0], format="csc"))
                with np.errstate(all="ignore"):
                    delta = spla.spsolve(lhs, -grad)
                if not np.all(np.isfinite(delta)):
                    raise RuntimeError("singular system")
            except Exception:
                lam = 1e-6 if lam == 0.0 else lam * 10.0
                damped = True
                continue
            trial = states.copy()
            trial[1:] += delta.reshape(-1, 4)
            trial[1:, 3] = np.array([wrap_angle(a) for a in trial[1:, 3]])
            trial_cost = _cost(trial, edges)
            if trial_cost <= cost:
                states, step_ok = trial, True
                break
            lam = 1e-6 if lam == 0.0 else lam * 10.0
            damped = True
        if not step_ok:
            break
        rel_change = (cost - trial_cost) / max(cost, 1e-300)
        cost = trial_cost
        if rel_change < rel_tol:
            converged = True
            break

    for n, st in zip(graph.nodes, states):
        n.pose = Pose4(float(st[0]), float(st[1]), float(st[2]), wrap_angle(float(st[3])))
    return OptimizeReport(iterations, cost_before, cost, converged, damped)
