"""Boustrophedon survey planning over a polygonal area.

Rows run along the sweep heading, offset perpendicular to it with centered
placement, so every interior point lies within half a row spacing of a row.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from shapely.geometry import LineString, Polygon

log = logging.getLogger(__name__)

PENDING = "pending"
REACHED = "reached"
SKIPPED = "skipped"

# rows farther apart than this multiple of the closure-search minimum would
# starve the mapper of loop closures between adjacent passes
MAX_ROW_SPACING_FACTOR = 1.5


@dataclass
class Waypoint:
    x: float
    y: float
    z: float
    heading: float
    status: str = PENDING

    def to_dict(self):
        return {
            "x": self.x, "y": self.y, "z": self.z,
            "heading": self.heading, "status": self.status,
        }


@dataclass
class SurveyPlan:
    polygon: np.ndarray            # (N, 2) world frame
    row_spacing: float
    waypoint_spacing: float
    sweep_heading: float
    waypoints: list[Waypoint] = field(default_factory=list)

    def pending_after(self, idx: int) -> int | None:
        for k in range(max(idx, 0), len(self.waypoints)):
            if self.waypoints[k].status == PENDING:
                return k
        return None

    def counts(self) -> dict:
        out = {PENDING: 0, REACHED: 0, SKIPPED: 0}
        for w in self.waypoints:
            out[w.status] += 1
        return out

    def to_json(self) -> str:
        return json.dumps(
            {
                "polygon": self.polygon.tolist(),
                "row_spacing": self.row_spacing,
                "waypoint_spacing": self.waypoint_spacing,
                "sweep_heading": self.sweep_heading,
                "waypoints": [w.to_dict() for w in self.waypoints],
            },
            indent=2,
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @staticmethod
    def from_json(text: str) -> "SurveyPlan":
        d = json.loads(text)
        plan = SurveyPlan(
            polygon=np.asarray(d["polygon"], dtype=float),
            row_spacing=d["row_spacing"],
            waypoint_spacing=d["waypoint_spacing"],
            sweep_heading=d["sweep_heading"],
        )
        plan.waypoints = [
            Waypoint(w["x"], w["y"], w["z"], w["heading"], w.get("status", PENDING))
            for w in d["waypoints"]
        ]
        return plan

    @staticmethod
    def load(path) -> "SurveyPlan":
        return SurveyPlan.from_json(Path(path).read_text())


def plan_survey(
    polygon,
    row_spacing: float,
    waypoint_spacing: float,
    sweep_heading: float = 0.0,
    loop_radius_min: float = 10.0,
) -> SurveyPlan:
    """Lay serpentine rows over the polygon and sample equally spaced waypoints."""
    poly_pts = np.asarray(polygon, dtype=float)
    if poly_pts.ndim != 2 or len(poly_pts) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    if row_spacing <= 0 or waypoint_spacing <= 0:
        raise ValueError("spacings must be positive")
    if row_spacing > MAX_ROW_SPACING_FACTOR * loop_radius_min:
        raise ValueError(
            f"row spacing {row_spacing} m exceeds "
            f"{MAX_ROW_SPACING_FACTOR:.1f}x the closure radius minimum {loop_radius_min} m"
        )
    shp = Polygon(poly_pts)
    if not shp.is_valid or shp.area <= 0:
        raise ValueError("polygon must be simple with positive area")

    # work in the sweep frame: rows are horizontal lines there
    c, s = math.cos(-sweep_heading), math.sin(-sweep_heading)
    rot = np.array([[c, -s], [s, c]])
    local = poly_pts @ rot.T
    shp_local = Polygon(local)
    minx, miny, maxx, maxy = shp_local.bounds
    height = maxy - miny
    n_rows = max(1, math.ceil(height / row_spacing))
    if n_rows == 1 and height > 0 and row_spacing >= height:
        log.warning(
            "row spacing %.1f m covers the whole polygon height %.1f m; single-row plan",
            row_spacing, height,
        )
    span = (n_rows - 1) * row_spacing
    margin = (height - span) / 2.0
    offsets = [miny + margin + k * row_spacing for k in range(n_rows)]

    inv = rot.T
    waypoints: list[Waypoint] = []
    for row_idx, y in enumerate(offsets):
        line = LineString([(minx - 1.0, y), (maxx + 1.0, y)])
        inter = shp_local.intersection(line)
        segs = []
        if inter.is_empty:
            continue
        geoms = getattr(inter, "geoms", [inter])
        for geom in geoms:
            coords = list(geom.coords)
            if len(coords) >= 2:
                segs.append((coords[0], coords[-1]))
            elif len(coords) == 1:
                segs.append((coords[0], coords[0]))
        reverse = row_idx % 2 == 1
        segs.sort(key=lambda sg: min(sg[0][0], sg[1][0]), reverse=reverse)
        for a, b in segs:
            (x0, y0), (x1, y1) = (a, b)
            if (x1 < x0) != reverse:
                x0, y0, x1, y1 = x1, y1, x0, y0
            length = math.hypot(x1 - x0, y1 - y0)
            n = max(1, math.ceil(length / waypoint_spacing - 1e-9))
            heading_local = math.atan2(y1 - y0, x1 - x0) if length > 0 else 0.0
            count = n + 1 if length > 0 else 1
            for i in range(count):
                t = i / n if n else 0.0
                px, py = x0 + t * (x1 - x0), y0 + t * (y1 - y0)
                wx, wy = inv @ np.array([px, py])
                waypoints.append(
                    Waypoint(
                        float(wx), float(wy), 0.0,
                        float(heading_local + sweep_heading), PENDING,
                    )
                )
    if not waypoints:
        raise ValueError("polygon produced no waypoints")
    return SurveyPlan(
        polygon=poly_pts,
        row_spacing=row_spacing,
        waypoint_spacing=waypoint_spacing,
        sweep_heading=sweep_heading,
        waypoints=waypoints,
    )
