"""Circle fitting per stem band: algebraic initialization, geometric refinement."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ReconstructionError(RuntimeError):
    pass


@dataclass
class CircleBand:
    height: float           # band center, normalized above terrain
    cx: float
    cy: float
    radius: float
    rms: float
    arc_deg: float          # angular span of the supporting points
    n_points: int

    @property
    def low_coverage(self) -> bool:
        return self.arc_deg < 180.0

    def to_dict(self):
        return {
            "height": self.height, "cx": self.cx, "cy": self.cy,
            "radius": self.radius, "rms": self.rms,
            "arc_deg": self.arc_deg, "n_points": self.n_points,
        }


def fit_circle_kasa(xy: np.ndarray) -> tuple[float, float, float]:
    """Algebraic least squares: linear in (D, E, F) for x^2+y^2+Dx+Ey+F=0."""
    xy = np.asarray(xy, dtype=float)
    a = np.column_stack([xy[:, 0], xy[:, 1], np.ones(len(xy))])
    b = -(xy[:, 0] ** 2 + xy[:, 1] ** 2)
    coef, *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy = -coef[0] / 2.0, -coef[1] / 2.0
    r_sq = cx * cx + cy * cy - coef[2]
    if r_sq <= 0:
        raise ReconstructionError("algebraic circle fit collapsed")
    return float(cx), float(cy), float(math.sqrt(r_sq))


def _circle_rms(xy, cx, cy, r) -> float:
    d = np.hypot(xy[:, 0] - cx, xy[:, 1] - cy) - r
    return float(np.sqrt(np.mean(d * d)))


def refine_circle(
    xy: np.ndarray, cx: float, cy: float, r: float, max_iterations: int = 30
) -> tuple[float, float, float, float]:
    """Geometric Gauss-Newton; guaranteed not to exceed the initial RMS."""
    xy = np.asarray(xy, dtype=float)
    best = (cx, cy, r)
    best_rms = _circle_rms(xy, cx, cy, r)
    params = np.array([cx, cy, r])
    lam = 0.0
    for _ in range(max_iterations):
        dx = xy[:, 0] - params[0]
        dy = xy[:, 1] - params[1]
        dist = np.hypot(dx, dy)
        dist = np.maximum(dist, 1e-12)
        res = dist - params[2]
        jac = np.column_stack([-dx / dist, -dy / dist, -np.ones(len(xy))])
        jtj = jac.T @ jac
        jtr = jac.T @ res
        stepped = False
        for _try in range(6):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(3), -jtr)
            except np.linalg.LinAlgError:
                lam = max(lam * 10.0, 1e-9)
                continue
            trial = params + delta
            rms = _circle_rms(xy, *trial)
            if np.isfinite(rms) and rms <= best_rms and trial[2] > 0:
                improvement = best_rms - rms
                params = trial
                best = tuple(trial)
                best_rms = rms
                stepped = True
                lam = lam / 10.0 if lam > 1e-12 else 0.0
                if improvement < 1e-14:
                    stepped = False  # converged
                break
            lam = max(lam * 10.0, 1e-9)
        if not stepped:
            break
    return best[0], best[1], best[2], best_rms


def _arc_span_deg(xy, cx, cy) -> float:
    ang = np.sort(np.arctan2(xy[:, 1] - cy, xy[:, 0] - cx))
    if len(ang) < 2:
        return 0.0
    gaps = np.diff(ang)
    wrap_gap = 2.0 * math.pi - (ang[-1] - ang[0])
    largest = max(gaps.max(), wrap_gap)
    return math.degrees(2.0 * math.pi - largest)


def fit_circles_along_stem(
    normalized_points: np.ndarray,
    band_height: float = 0.5,
    min_band_points: int = 10,
    rms_gate: float = 0.05,
    max_radius: float = 1.0,
    min_arc_deg: float = 30.0,
) -> list[CircleBand]:
    """Partition by normalized height and fit one circle per populated band.

    Bands failing the RMS gate are dropped, as are pathological fits (near-zero
    angular support or implausible radii, the shallow-arc blowup mode).
    Partial-arc bands above the pathology floor are kept and flagged.
    Raises ReconstructionError when fewer than two bands survive.
    """
    pts = np.asarray(normalized_points, dtype=float).reshape(-1, 3)
    if len(pts) == 0:
        raise ReconstructionError("empty instance cloud")
    bands: list[CircleBand] = []
    z = pts[:, 2]
    k_min = int(math.floor(z.min() / band_height))
    k_max = int(math.floor(z.max() / band_height))
    for k in range(k_min, k_max + 1):
        lo, hi = k * band_height, (k + 1) * band_height
        sel = (z >= lo) & (z < hi)
        if sel.sum() < min_band_points:
            continue
        xy = pts[sel, :2]
        try:
            cx, cy, r = fit_circle_kasa(xy)
        except ReconstructionError:
            continue
        cx, cy, r, rms = refine_circle(xy, cx, cy, r)
        # robust pass: drop smeared tails, refit on the dominant ring
        for _ in range(2):
            resid = np.abs(np.hypot(xy[:, 0] - cx, xy[:, 1] - cy) - r)
            keep = resid <= max(2.5 * rms, 0.01)
            if keep.all() or keep.sum() < max(min_band_points, int(0.5 * len(xy))):
                break
            xy = xy[keep]
            cx, cy, r, rms = refine_circle(xy, cx, cy, r)
        if rms > rms_gate or r <= 0 or r > max_radius:
            continue
        if _arc_span_deg(xy, cx, cy) < min_arc_deg:
            continue
        bands.append(
            CircleBand(
                height=lo + band_height / 2.0,
                cx=cx, cy=cy, radius=r, rms=rms,
                arc_deg=_arc_span_deg(xy, cx, cy),
                n_points=len(xy),
            )
        )
    if len(bands) < 2:
        raise ReconstructionError(
            f"only {len(bands)} usable band(s); need 2 for a frustum stack"
        )
    bands.sort(key=lambda b: b.height)
    return bands
