"""Append-only event/message log shared by headless runs and the live service."""

from __future__ import annotations

import json
from pathlib import Path


class EventRecorder:
    def __init__(self):
        self.lines: list[str] = []
        self.trajectory: list[tuple[float, float, float]] = []      # t, x, y (true)
        self.est_trajectory: list[tuple[float, float, float]] = []

    def log_out(self, msg: dict) -> None:
        self.lines.append(json.dumps({"dir": "out", "msg": msg}, sort_keys=True))

    def log_in(self, t: float, msg: dict) -> None:
        self.lines.append(json.dumps({"dir": "in", "t": t, "msg": msg}, sort_keys=True))

    def sample(self, t: float, true_xy, est_xy) -> None:
        self.trajectory.append((t, float(true_xy[0]), float(true_xy[1])))
        self.est_trajectory.append((t, float(est_xy[0]), float(est_xy[1])))

    def save(self, path) -> None:
        Path(path).write_text("\n".join(self.lines) + ("\n" if self.lines else ""))
