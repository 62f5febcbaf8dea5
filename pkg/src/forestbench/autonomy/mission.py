"""Mission-planner state machine: schedules survey goals and reacts to feedback."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .survey import PENDING, REACHED, SKIPPED, SurveyPlan

IDLE = "idle"
EXECUTING = "executing"
PAUSED = "paused"
COMPLETED = "completed"
ABORTED = "aborted"

SEND_GOAL = "send_goal"
SAFE_STOP = "safe_stop"
FINISH = "finish"
NO_ACTION = "none"


class IllegalTransition(ValueError):
    pass


@dataclass
class Action:
    kind: str
    goal_index: int | None = None


@dataclass
class MissionStateMachine:
    phase: str = IDLE
    goal_index: int | None = None
    skip_log: list[int] = field(default_factory=list)
    event_log: list[dict] = field(default_factory=list)

    def _log(self, t: float, event: str, detail: Any = None):
        self.event_log.append(
            {"t": t, "event": event, "phase": self.phase, "goal": self.goal_index,
             **({"detail": detail} if detail is not None else {})}
        )

    def _require(self, *phases):
        if self.phase not in phases:
            raise IllegalTransition(
                f"event not legal in phase {self.phase!r} (needs {'/'.join(phases)})"
            )

    def _advance(self, plan: SurveyPlan, from_idx: int, t: float) -> Action:
        nxt = plan.pending_after(from_idx)
        if nxt is None:
            self.phase = COMPLETED
            self._log(t, "completed")
            return Action(FINISH)
        self.goal_index = nxt
        self._log(t, "goal_sent", nxt)
        return Action(SEND_GOAL, nxt)

    def step(self, plan: SurveyPlan, event: str, t: float = 0.0, goal: int | None = None) -> Action:
        """Apply one event; raises IllegalTransition without mutating state."""
        if event == "start":
            self._require(IDLE)
            self.phase = EXECUTING
            self._log(t, "start")
            return self._advance(plan, 0, t)
        if event == "goal_reached":
            self._require(EXECUTING)
            if self.goal_index is not None:
                plan.waypoints[self.goal_index].status = REACHED
                self._log(t, "goal_reached", self.goal_index)
            return self._advance(plan, (self.goal_index or 0) + 1, t)
        if event == "goal_unreachable":
            self._require(EXECUTING)
            if self.goal_index is not None:
                plan.waypoints[self.goal_index].status = SKIPPED
                self.skip_log.append(self.goal_index)
                self._log(t, "goal_skipped", self.goal_index)
            return self._advance(plan, (self.goal_index or 0) + 1, t)
        if event == "operator_interrupt":
            self._require(EXECUTING)
            self.phase = PAUSED
            self._log(t, "interrupt")
            return Action(SAFE_STOP)
        if event == "operator_resume":
            self._require(PAUSED)
            if goal is None:
                goal = self.goal_index if self.goal_index is not None else 0
            if not (0 <= goal < len(plan.waypoints)):
                raise IllegalTransition(f"resume goal {goal} out of range")
            self.phase = EXECUTING
            if plan.waypoints[goal].status != PENDING:
                plan.waypoints[goal].status = PENDING
            self.goal_index = goal
            self._log(t, "resume", goal)
            return Action(SEND_GOAL, goal)
        if event == "plan_exhausted":
            self._require(EXECUTING)
            self.phase = COMPLETED
            self._log(t, "completed")
            return Action(FINISH)
        if event == "abort":
            self._require(EXECUTING, PAUSED)
            self.phase = ABORTED
            self._log(t, "abort")
            return Action(SAFE_STOP)
        raise IllegalTransition(f"unknown event {event!r}")
