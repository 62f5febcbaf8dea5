"""Mission evaluation: autonomy segments, MDBI/MTBI, covered area, report."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

CAUSES = ("push", "dead-end", "trapped", "safety")


@dataclass(frozen=True)
class InterventionRecord:
    start: float
    end: float
    start_xy: tuple[float, float]
    end_xy: tuple[float, float]
    cause: str = "push"

    @property
    def duration(self) -> float:
        return self.end - self.start

    def to_dict(self):
        return {
            "start": self.start, "end": self.end,
            "start_xy": list(self.start_xy), "end_xy": list(self.end_xy),
            "cause": self.cause,
        }

    @staticmethod
    def from_dict(d) -> "InterventionRecord":
        return InterventionRecord(
            d["start"], d["end"], tuple(d["start_xy"]), tuple(d["end_xy"]), d["cause"]
        )


@dataclass(frozen=True)
class AutonomySegment:
    start: float
    end: float
    distance: float

    @property
    def duration(self) -> float:
        return self.end - self.start

    def to_dict(self):
        return {"start": self.start, "end": self.end, "distance": self.distance}


def _validate_interventions(interventions, t0: float, t1: float):
    prev_end = None
    for rec in interventions:
        if rec.end < rec.start:
            raise ValueError(f"intervention ends before it starts: {rec}")
        if prev_end is not None and rec.start < prev_end:
            raise ValueError("interventions overlap or are out of order")
        if rec.start < t0 - 1e-9 or rec.end > t1 + 1e-9:
            raise ValueError("intervention outside the mission span")
        prev_end = rec.end


def _arc_length_between(traj: np.ndarray, t0: float, t1: float) -> float:
    """Polyline length of the (t, x, y) trajectory restricted to [t0, t1]."""
    t = traj[:, 0]
    if t1 <= t[0] or t0 >= t[-1] or t1 <= t0:
        return 0.0

    def point_at(tq: float) -> np.ndarray:
        i = np.searchsorted(t, tq, side="right") - 1
        i = min(max(i, 0), len(t) - 2)
        dt = t[i + 1] - t[i]
        lam = 0.0 if dt <= 0 else (tq - t[i]) / dt
        return traj[i, 1:3] + lam * (traj[i + 1, 1:3] - traj[i, 1:3])

    inside = (t > t0) & (t < t1)
    pts = np.vstack([point_at(t0), traj[inside, 1:3], point_at(t1)])
    return float(np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1])).sum())


def compute_segments(
    trajectory, interventions: list[InterventionRecord]
) -> list[AutonomySegment]:
    """Maximal autonomous intervals between interventions, with arc lengths.

    Distance walked while an intervention is open is excluded from segment
    distances (it was not walked autonomously).
    """
    traj = np.asarray(trajectory, dtype=float)
    if traj.ndim != 2 or traj.shape[1] < 3 or len(traj) < 1:
        raise ValueError("trajectory must be (N, 3+) rows of (t, x, y, ...)")
    t0, t1 = float(traj[0, 0]), float(traj[-1, 0])
    recs = sorted(interventions, key=lambda r: r.start)
    _validate_interventions(recs, t0, t1)

    bounds = [t0]
    for rec in recs:
        bounds.extend([rec.start, rec.end])
    bounds.append(t1)
    segments = []
    for a, b in zip(bounds[0::2], bounds[1::2]):
        if b - a <= 1e-12:
            continue
        segments.append(
            AutonomySegment(start=a, end=b, distance=_arc_length_between(traj, a, b))
        )
    return segments


def compute_mdbi_mtbi(segments: list[AutonomySegment]) -> tuple[float | None, float | None]:
    """Arithmetic means of segment distances and durations; None when empty."""
    if not segments:
        return None, None
    mdbi = float(np.mean([s.distance for s in segments]))
    mtbi = float(np.mean([s.duration for s in segments]))
    return mdbi, mtbi


def compute_covered_area(
    trajectory_xy,
    effective_range: float,
    resolution: float = 0.25,
    bounds: tuple[float, float, float, float] | None = None,
) -> float:
    """Hectares covered by the union of sensing disks along the trajectory."""
    if effective_range <= 0:
        raise ValueError("effective range must be > 0")
    pts = np.asarray(trajectory_xy, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return 0.0
    # densify the polyline so disk unions have no gaps between samples
    if len(pts) > 1:
        segs = [pts[:1]]
        for a, b in zip(pts[:-1], pts[1:]):
            d = float(np.hypot(*(b - a)))
            n = max(1, int(math.ceil(d / (resolution))))
            lam = np.linspace(0.0, 1.0, n + 1)[1:, None]
            segs.append(a + lam * (b - a))
        pts = np.concatenate(segs)
    if bounds is None:
        x0, y0 = pts.min(axis=0) - effective_range - resolution
        x1, y1 = pts.max(axis=0) + effective_range + resolution
    else:
        x0, y0, x1, y1 = bounds
    xs = np.arange(x0 + resolution / 2, x1, resolution)
    ys = np.arange(y0 + resolution / 2, y1, resolution)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    cells = np.column_stack([gx.ravel(), gy.ravel()])
    dist, _ = cKDTree(pts).query(cells, k=1)
    covered = int((dist <= effective_range).sum())
    return covered * resolution * resolution / 10000.0


@dataclass
class MissionReport:
    mission_time: float
    distance_traveled: float
    area_covered_ha: float
    interventions: int
    mdbi: float | None
    mtbi: float | None
    segments: list[AutonomySegment] = field(default_factory=list)
    intervention_records: list[InterventionRecord] = field(default_factory=list)
    tree_count: int = 0
    trees_with_dbh: int = 0
    goals_reached: int = 0
    goals_skipped: int = 0
    completed: bool = False
    config_echo: dict = field(default_factory=dict)
    export_paths: dict = field(default_factory=dict)

    @property
    def intervention_durations(self) -> list[float]:
        return [r.duration for r in self.intervention_records]

    @property
    def coverage_rate_ha_per_h(self) -> float:
        if self.mission_time <= 0:
            return 0.0
        return self.area_covered_ha / (self.mission_time / 3600.0)

    def to_dict(self) -> dict:
        return {
            "mission_time": self.mission_time,
            "distance_traveled": self.distance_traveled,
            "area_covered_ha": self.area_covered_ha,
            "coverage_rate_ha_per_h": self.coverage_rate_ha_per_h,
            "interventions": self.interventions,
            "mdbi": self.mdbi,
            "mtbi": self.mtbi,
            "segments": [s.to_dict() for s in self.segments],
            "intervention_records": [r.to_dict() for r in self.intervention_records],
            "intervention_durations": self.intervention_durations,
            "tree_count": self.tree_count,
            "trees_with_dbh": self.trees_with_dbh,
            "goals_reached": self.goals_reached,
            "goals_skipped": self.goals_skipped,
            "completed": self.completed,
            "config_echo": self.config_echo,
            "export_paths": self.export_paths,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @staticmethod
    def from_dict(d: dict) -> "MissionReport":
        return MissionReport(
            mission_time=d["mission_time"],
            distance_traveled=d["distance_traveled"],
            area_covered_ha=d["area_covered_ha"],
            interventions=d["interventions"],
            mdbi=d["mdbi"],
            mtbi=d["mtbi"],
            segments=[AutonomySegment(**s) for s in d["segments"]],
            intervention_records=[
                InterventionRecord.from_dict(r) for r in d["intervention_records"]
            ],
            tree_count=d["tree_count"],
            trees_with_dbh=d["trees_with_dbh"],
            goals_reached=d["goals_reached"],
            goals_skipped=d["goals_skipped"],
            completed=d["completed"],
            config_echo=d.get("config_echo", {}),
            export_paths=d.get("export_paths", {}),
        )

    @staticmethod
    def load(path) -> "MissionReport":
        return MissionReport.from_dict(json.loads(Path(path).read_text()))

    def summary_text(self) -> str:
        def fmt(v, unit=""):
            return "-" if v is None else f"{v:.1f}{unit}"

        lines = [
            "mission summary",
            "---------------",
            f"mission time      : {self.mission_time:.1f} s",
            f"distance traveled : {self.distance_traveled:.1f} m",
            f"area covered      : {self.area_covered_ha:.2f} ha",
            f"coverage rate     : {self.coverage_rate_ha_per_h:.2f} ha/h",
            f"interventions     : {self.interventions}",
            f"MDBI              : {fmt(self.mdbi, ' m')}",
            f"MTBI              : {fmt(self.mtbi, ' s')}",
            f"trees             : {self.tree_count} ({self.trees_with_dbh} with DBH)",
            f"goals             : {self.goals_reached} reached, {self.goals_skipped} skipped",
            f"completed         : {'yes' if self.completed else 'no'}",
        ]
        return "\n".join(lines)


def build_report(
    trajectory,
    interventions: list[InterventionRecord],
    effective_range: float,
    tree_count: int = 0,
    trees_with_dbh: int = 0,
    goals_reached: int = 0,
    goals_skipped: int = 0,
    completed: bool = False,
    config_echo: dict | None = None,
    coverage_resolution: float = 0.25,
) -> MissionReport:
    traj = np.asarray(trajectory, dtype=float)
    if len(traj) == 0:
        return MissionReport(0.0, 0.0, 0.0, 0, None, None, completed=completed)
    segments = compute_segments(traj, interventions)
    mdbi, mtbi = compute_mdbi_mtbi(segments)
    area = compute_covered_area(traj[:, 1:3], effective_range, coverage_resolution)
    # same code path as segment distances: with zero interventions the
    # MDBI = distance identity then holds bit-for-bit
    total_dist = _arc_length_between(traj, float(traj[0, 0]), float(traj[-1, 0]))
    return MissionReport(
        mission_time=float(traj[-1, 0] - traj[0, 0]),
        distance_traveled=total_dist,
        area_covered_ha=area,
        interventions=len(interventions),
        mdbi=mdbi,
        mtbi=mtbi,
        segments=segments,
        intervention_records=list(interventions),
        tree_count=tree_count,
        trees_with_dbh=trees_with_dbh,
        goals_reached=goals_reached,
        goals_skipped=goals_skipped,
        completed=completed,
        config_echo=config_echo or {},
    )
