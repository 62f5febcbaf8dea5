import copy

import numpy as np
import pytest

from forestbench.autonomy import (
    COMPLETED,
    EXECUTING,
    FINISH,
    IDLE,
    PAUSED,
    SAFE_STOP,
    SEND_GOAL,
    IllegalTransition,
    MissionStateMachine,
    plan_survey,
)

RECT = [(0.0, 0.0), (40.0, 0.0), (40.0, 25.0), (0.0, 25.0)]


def fresh():
    plan = plan_survey(RECT, 10.0, 10.0)
    return MissionStateMachine(), plan


def test_unreachable_goal_is_skipped_and_next_sent():
    sm, plan = fresh()
    sm.step(plan, "start")
    for _ in range(3):
        sm.step(plan, "goal_reached")
    assert sm.goal_index == 3
    action = sm.step(plan, "goal_unreachable")
    assert plan.waypoints[3].status == "skipped"
    assert action.kind == SEND_GOAL and action.goal_index == 4
    assert sm.skip_log == [3]


def test_interrupt_pauses_with_safe_stop():
    sm, plan = fresh()
    sm.step(plan, "start")
    action = sm.step(plan, "operator_interrupt")
    assert sm.phase == PAUSED
    assert action.kind == SAFE_STOP


def test_resume_from_specified_goal():
    sm, plan = fresh()
    sm.step(plan, "start")
    sm.step(plan, "operator_interrupt")
    action = sm.step(plan, "operator_resume", goal=7)
    assert sm.phase == EXECUTING
    assert action.kind == SEND_GOAL and action.goal_index == 7
    assert sm.goal_index == 7


def test_plan_exhaustion_completes():
    sm, plan = fresh()
    sm.step(plan, "start")
    last = None
    for _ in range(len(plan.waypoints)):
        last = sm.step(plan, "goal_reached")
    assert sm.phase == COMPLETED
    assert last.kind == FINISH
    assert all(w.status == "reached" for w in plan.waypoints)


def test_illegal_transitions_leave_state_unchanged():
    sm, plan = fresh()
    for event in ("goal_reached", "operator_interrupt", "operator_resume", "plan_exhausted"):
        snapshot = (sm.phase, sm.goal_index, list(sm.skip_log))
        with pytest.raises(IllegalTransition):
            sm.step(plan, event)
        assert (sm.phase, sm.goal_index, list(sm.skip_log)) == snapshot
    sm.step(plan, "start")
    with pytest.raises(IllegalTransition):
        sm.step(plan, "start")
    with pytest.raises(IllegalTransition):
        sm.step(plan, "operator_resume", goal=2)


def test_event_fuzz_never_reaches_illegal_state():
    legal_phases = {IDLE, EXECUTING, PAUSED, COMPLETED, "aborted"}
    events = [
        "start", "goal_reached", "goal_unreachable", "operator_interrupt",
        "operator_resume", "plan_exhausted", "abort",
    ]
    rng = np.random.default_rng(42)
    for _ in range(300):
        sm, plan = fresh()
        goal_history = []
        for _ in range(30):
            ev = events[rng.integers(len(events))]
            goal = int(rng.integers(0, len(plan.waypoints))) if ev == "operator_resume" else None
            before = copy.deepcopy((sm.phase, sm.goal_index))
            try:
                sm.step(plan, ev, goal=goal)
            except IllegalTransition:
                assert (sm.phase, sm.goal_index) == before
                continue
            assert sm.phase in legal_phases
            if sm.goal_index is not None:
                if ev != "operator_resume" and goal_history:
                    assert sm.goal_index >= goal_history[-1]
                goal_history.append(sm.goal_index)
