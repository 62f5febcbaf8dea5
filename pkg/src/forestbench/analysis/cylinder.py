"""Least-squares cylinder fitting with a vertical-axis initialization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CylinderFitError(RuntimeError):
    pass


@dataclass
class CylinderFit:
    point: np.ndarray       # (3,) on the axis, at the cloud's mean height
    direction: np.ndarray   # (3,) unit, z > 0
    radius: float
    rms: float
    n_points: int

    def axis_xy_at(self, z: float) -> np.ndarray:
        t = (z - self.point[2]) / self.direction[2]
        return self.point[:2] + t * self.direction[:2]

    def distance_to_axis(self, points: np.ndarray) -> np.ndarray:
        rel = np.asarray(points, dtype=float).reshape(-1, 3) - self.point
        cross = np.cross(rel, self.direction)
        return np.linalg.norm(cross, axis=1)


def _residuals(params, pts, z_ref):
    ax, ay, nx, ny, r = params
    u = np.array([nx, ny, 1.0])
    u = u / np.linalg.norm(u)
    rel = pts - np.array([ax, ay, z_ref])
    d = np.linalg.norm(np.cross(rel, u), axis=1)
    return d - r


def fit_cylinder(points: np.ndarray, max_iterations: int = 40) -> CylinderFit:
    """Minimize sum of squared (distance-to-axis minus radius).

    Gauss-Newton over axis point (2 DOF at the mean height), axis tilt
    (2 DOF), and radius, with Levenberg damping; only improving steps are
    accepted.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) < 10:
        raise CylinderFitError(f"need at least 10 points, got {len(pts)}")
    spread = np.linalg.eigvalsh(np.cov(pts[:, :2].T))  # ascending
    if not np.isfinite(spread).all() or spread[0] < 1e-10:
        raise CylinderFitError("projected points are degenerate (collinear)")

    z_ref = float(pts[:, 2].mean())
    cx, cy = pts[:, :2].mean(axis=0)
    r0 = float(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy).mean())
    params = np.array([cx, cy, 0.0, 0.0, max(r0, 1e-3)])

    res = _residuals(params, pts, z_ref)
    cost = float(res @ res)
    eps = 1e-7
    lam = 0.0
    for _ in range(max_iterations):
        jac = np.empty((len(pts), 5))
        for k in range(5):
            bumped = params.copy()
            bumped[k] += eps
            jac[:, k] = (_residuals(bumped, pts, z_ref) - res) / eps
        jtj = jac.T @ jac
        jtr = jac.T @ res
        improved = False
        for _try in range(8):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(5), -jtr)
            except np.linalg.LinAlgError:
                lam = max(lam * 10.0, 1e-8)
                continue
            trial = params + delta
            trial_res = _residuals(trial, pts, z_ref)
            trial_cost = float(trial_res @ trial_res)
            if np.isfinite(trial_cost) and trial_cost <= cost:
                rel_change = (cost - trial_cost) / max(cost, 1e-300)
                params, res, cost = trial, trial_res, trial_cost
                lam = lam / 10.0 if lam > 1e-12 else 0.0
                improved = True
                if rel_change < 1e-12:
                    max_iterations = 0  # converged
                break
            lam = max(lam * 10.0, 1e-8)
        if not improved or max_iterations == 0:
            break

    ax, ay, nx, ny, radius = params
    if not np.isfinite(params).all() or radius <= 0:
        raise CylinderFitError("fit diverged or produced a non-positive radius")
    u = np.array([nx, ny, 1.0])
    u = u / np.linalg.norm(u)
    return CylinderFit(
        point=np.array([ax, ay, z_ref]),
        direction=u,
        radius=float(radius),
        rms=float(np.sqrt(cost / len(pts))),
        n_points=len(pts),
    )
