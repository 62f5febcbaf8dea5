"""The mission session: one deterministic sense-estimate-plan-act-analyze loop.

A session steps in fixed simulated-time ticks. The same object backs headless
runs (run() to completion) and the live service (one tick per scheduler slot,
commands drained at tick boundaries), so both modes produce identical logs
for identical command timelines.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from ..geometry import Pose4, make_transform, transform_points, wrap_angle
from ..simworld import (
    InterventionError,
    Push,
    RobotState,
    VelocityLimits,
    apply_intervention,
    generate_world,
    measure_odometry,
    scan_lidar,
    snap_to_terrain,
    step_robot,
)
from ..simworld.robot import HIP_HEIGHT
from ..estimation import (
    PayloadAccumulator,
    PoseGraph,
    TerrainMap,
    detect_loop_closures,
    optimize_graph,
)
from ..autonomy import (
    COMPLETED,
    EXECUTING,
    GOAL_REACHED,
    IDLE,
    LOCAL_MINIMUM,
    PAUSED,
    IllegalTransition,
    MissionStateMachine,
    ProgressMonitor,
    compute_cost,
    compute_gdf,
    compute_velocity_command,
    plan_survey,
    score_traversability,
)
from ..analysis import (
    DegenerateTerrain,
    ForestInventory,
    export_marteloscope,
    fit_terrain_cloth,
    segment_trees,
)
from ..metrics import (
    InterventionRecord,
    MissionReport,
    build_report,
    compute_mdbi_mtbi,
    compute_segments,
)
from .config import MissionConfig
from .recorder import EventRecorder


class MissionSession:
    def __init__(self, config: MissionConfig):
        config.validate()
        self.config = config
        seeds = np.random.SeedSequence(config.seed).spawn(3)
        self.rng_lidar = np.random.default_rng(seeds[0])
        self.rng_odom = np.random.default_rng(seeds[1])
        self.rng_registration = np.random.default_rng(seeds[2])

        self.world = generate_world(config.world)
        self.plan = None
        if config.survey.polygon:
            self.plan = plan_survey(
                config.survey.polygon,
                config.survey.row_spacing,
                config.survey.waypoint_spacing,
                config.survey.sweep_heading,
                loop_radius_min=config.estimation.loop_band[0],
            )
        self.machine = MissionStateMachine()
        self.limits = VelocityLimits(
            config.robot.max_vx, config.robot.max_vy, config.robot.max_yaw_rate
        )

        start = self.plan.waypoints[0] if self.plan else None
        sx = start.x if start else config.world.extent[0] / 2.0
        sy = start.y if start else config.world.extent[1] / 2.0
        syaw = start.heading if start else 0.0
        self.robot: RobotState = snap_to_terrain(self.world, sx, sy, syaw)

        # odometry frame == map frame at t0 (gauge)
        self.odom_pose = self._true_pose4()
        self.map_correction = Pose4()
        self.graph = PoseGraph()
        self.node_odom: dict[int, Pose4] = {}
        self.true_poses: dict[int, Pose4] = {}
        nid = self.graph.add_node(self.estimate(), scan_ref=None, timestamp=0.0)
        self.node_odom[nid] = self.odom_pose
        self.true_poses[nid] = self._true_pose4()

        self.tmap = TerrainMap(
            resolution=config.estimation.terrain_resolution,
            window=config.estimation.terrain_window,
        )
        self.tmap.recenter(sx, sy)
        self.accumulator = PayloadAccumulator(
            travel_threshold=config.estimation.payload_travel,
            voxel_size=config.estimation.payload_voxel,
        )
        self.inventory = ForestInventory()
        self.recorder = EventRecorder()
        self.monitor = ProgressMonitor(
            window=config.planner.progress_window,
            min_progress=config.planner.progress_min,
        )

        self.t = 0.0
        self.tick_count = 0
        self.seq = 0
        self.done = False
        self.aborted = False
        self._field = None
        self._field_time = -math.inf
        self._field_goal = None
        self._travel_since_node = 0.0
        self._pending_closures = 0
        self._last_scan_t = -math.inf
        self._scan_counter = 0
        self._last_state_msg = -math.inf
        self._last_metrics_msg = -math.inf
        self._last_terrain_msg = -math.inf
        self._blacklist: list[tuple[float, float]] = []
        self._blacklist_version = 0
        self._field_blacklist_version = -1
        self._last_free_xy = (sx, sy)
        self._open_record: dict | None = None
        self.intervention_records: list[InterventionRecord] = []
        self._rescue_armed = True
        self._queue: list[dict] = []
        self._payload_dir = Path(config.output_dir) / "payloads"
        self._goals_reached = 0
        self._out_messages: list[dict] = []

        if config.policy.mode == "scripted":
            for cmd in config.policy.scripted:
                self.submit(dict(cmd))
        self.recorder.sample(0.0, (self.robot.x, self.robot.y), (sx, sy))

    # ------------------------------------------------------------------ poses

    def _true_pose4(self) -> Pose4:
        return Pose4(self.robot.x, self.robot.y, self.robot.z, self.robot.yaw)

    def estimate(self) -> Pose4:
        return self.map_correction.compose(self.odom_pose)

    def _sensor_matrix(self, base: Pose4) -> np.ndarray:
        """World-from-sensor using exact roll/pitch and the given planar pose."""
        m = make_transform(
            (base.x, base.y, base.z), base.yaw, self.robot.pitch, self.robot.roll
        )
        offset = np.eye(4)
        offset[2, 3] = self.config.robot.sensor_offset
        return m @ offset

    # ------------------------------------------------------------ commands

    def submit(self, msg: dict) -> None:
        """Queue a wire-style command; applied at its 'at' time (or next tick)."""
        self._queue.append(msg)

    def _emit(self, mtype: str, data: dict) -> None:
        self.seq += 1
        msg = {"type": mtype, "seq": self.seq, "data": data}
        self.recorder.log_out(msg)
        self._out_messages.append(msg)

    def _ack(self, command: str, ok: bool, reason: str | None = None, extra=None):
        data = {"kind": "ack" if ok else "reject", "command": command}
        if getattr(self, "_cmd_seq", None) is not None:
            data["cmd_seq"] = self._cmd_seq
        if reason:
            data["reason"] = reason
        if extra:
            data.update(extra)
        self._emit("event", data)

    def _apply_command(self, msg: dict) -> None:
        ctype = msg.get("type")
        data = msg.get("data", {}) or {}
        self._cmd_seq = msg.get("seq")
        self.recorder.log_in(self.t, {"type": ctype, "data": data})
        try:
            if ctype == "define_survey":
                if self.machine.phase != IDLE:
                    raise IllegalTransition("survey can only be defined while idle")
                self.plan = plan_survey(
                    [tuple(p) for p in data["polygon"]],
                    float(data.get("row_spacing", self.config.survey.row_spacing)),
                    float(data.get("waypoint_spacing", self.config.survey.waypoint_spacing)),
                    float(data.get("sweep_heading", self.config.survey.sweep_heading)),
                    loop_radius_min=self.config.estimation.loop_band[0],
                )
                self._ack(ctype, True, extra={
                    "waypoints": [w.to_dict() for w in self.plan.waypoints]
                })
            elif ctype == "start":
                if self.plan is None:
                    raise IllegalTransition("no survey plan defined")
                action = self.machine.step(self.plan, "start", self.t)
                self._on_action(action)
                self._ack(ctype, True)
            elif ctype == "interrupt":
                action = self.machine.step(self.plan, "operator_interrupt", self.t)
                self._open_intervention(data.get("cause", "safety"))
                self._on_action(action)
                self._ack(ctype, True)
            elif ctype == "push":
                if self.machine.phase != PAUSED:
                    raise IllegalTransition("push requires an interrupted (paused) mission")
                distance = float(data.get("distance", self.config.policy.push_distance))
                if data.get("toward_last_free"):
                    distance, heading = self._rescue_landing(distance)
                else:
                    heading = float(data["heading"])
                pre_xy = (self.robot.x, self.robot.y)
                pre_z = self.robot.z
                self.robot = apply_intervention(
                    self.world, self.robot, Push(distance, heading)
                )
                if data.get("blacklist", True) and data.get("toward_last_free"):
                    self._blacklist.append(pre_xy)
                    self._blacklist_version += 1
                # teleport the estimate with the robot: the operator moves the
                # platform and odometry observes the jump (including the
                # terrain-height change) exactly, since no walking happened
                self.odom_pose = Pose4(
                    self.odom_pose.x + (self.robot.x - pre_xy[0]),
                    self.odom_pose.y + (self.robot.y - pre_xy[1]),
                    self.odom_pose.z + (self.robot.z - pre_z),
                    self.odom_pose.yaw,
                )
                if self._open_record is None:
                    self._open_intervention("push")
                self._emit("event", {
                    "kind": "intervention", "action": "push",
                    "distance": distance, "heading": heading,
                    "trapped": self.robot.trapped,
                })
                self._ack(ctype, True)
            elif ctype == "resume":
                goal = data.get("goal")
                action = self.machine.step(
                    self.plan, "operator_resume", self.t,
                    goal=None if goal is None else int(goal),
                )
                self._close_intervention()
                self.monitor.reset()
                self._field_goal = None  # force refresh for the resumed goal
                self._on_action(action)
                self._rescue_armed = True
                self._ack(ctype, True)
            elif ctype == "set_params":
                # runtime-tunable knobs; unknown keys are reported back
                known = {}
                for key in ("speed_factor",):
                    if key in data:
                        known[key] = data[key]
                self._ack(ctype, True, extra={"applied": known})
            else:
                self._ack(ctype or "?", False, f"unknown command type {ctype!r}")
        except (IllegalTransition, InterventionError, KeyError, ValueError) as err:
            self._ack(ctype or "?", False, str(err))

    def _on_action(self, action) -> None:
        if action.kind == "send_goal":
            self.monitor.reset()
            self._field_goal = None
            wp = self.plan.waypoints[action.goal_index]
            self._emit("event", {
                "kind": "goal", "goal_index": action.goal_index,
                "x": wp.x, "y": wp.y, "heading": wp.heading,
            })
        elif action.kind == "finish":
            self._emit("event", {"kind": "mission_complete", "t": self.t})
            self.done = True
        elif action.kind == "safe_stop":
            self._emit("event", {"kind": "safe_stop", "t": self.t})

    # ------------------------------------------------------- interventions

    def _open_intervention(self, cause: str) -> None:
        if self._open_record is None:
            self._open_record = {
                "start": self.t,
                "start_xy": (self.robot.x, self.robot.y),
                "cause": cause,
            }
            self._emit("event", {"kind": "intervention", "action": "open", "cause": cause})

    def _close_intervention(self) -> None:
        if self._open_record is not None:
            rec = InterventionRecord(
                start=self._open_record["start"],
                end=self.t,
                start_xy=self._open_record["start_xy"],
                end_xy=(self.robot.x, self.robot.y),
                cause=self._open_record["cause"],
            )
            self.intervention_records.append(rec)
            self._open_record = None
            self._emit("event", {
                "kind": "intervention", "action": "close",
                "duration": rec.duration, "cause": rec.cause,
            })

    def _rescue_landing(self, distance: float) -> tuple[float, float]:
        """Pick a push the operator would: onto ground that is actually clear.

        Tries the retreat direction first, then fans out; avoids damp patches,
        previously blacklisted spots, and the world border.
        """
        base = math.atan2(
            self._last_free_xy[1] - self.robot.y,
            self._last_free_xy[0] - self.robot.x,
        )
        offsets = [0.0, 0.5, -0.5, 1.0, -1.0, 1.6, -1.6, math.pi]
        for dist in (distance, min(3.0, distance + 1.0)):
            for off in offsets:
                heading = wrap_angle(base + off)
                nx = self.robot.x + dist * math.cos(heading)
                ny = self.robot.y + dist * math.sin(heading)
                if not self.world.contains(nx, ny):
                    continue
                if self.world.patch_at(nx, ny, "damp") is not None:
                    continue
                clear = all(
                    math.hypot(nx - bx, ny - by)
                    > self.config.planner.blacklist_radius + 0.3
                    for bx, by in self._blacklist
                )
                if clear:
                    return dist, heading
        return distance, base  # no validated landing; push anyway

    def _rescue_policy(self) -> None:
        if self.config.policy.mode != "rescue":
            return
        if self.robot.trapped and self.machine.phase == EXECUTING and self._rescue_armed:
            self._rescue_armed = False
            delay = self.config.policy.rescue_delay
            self.submit({"type": "interrupt", "at": self.t, "data": {"cause": "trapped"}})
            self.submit({
                "type": "push", "at": self.t + delay,
                "data": {
                    "distance": self.config.policy.push_distance,
                    "toward_last_free": True,
                },
            })
            self.submit({
                "type": "resume", "at": self.t + delay + self.config.dt, "data": {},
            })

    # ------------------------------------------------------------- planner

    def _goal_cell(self, field_cost, goal_xy):
        n, m = field_cost.shape
        res = self.tmap.resolution
        gi = int(math.floor((goal_xy[0] - self.tmap.origin[0]) / res))
        gj = int(math.floor((goal_xy[1] - self.tmap.origin[1]) / res))
        ci = min(max(gi, 1), n - 2)
        cj = min(max(gj, 1), m - 2)
        proxy = (ci != gi) or (cj != gj)
        if field_cost[ci, cj] >= self.config.planner.lethal_cost and proxy:
            # the true goal is off-window; steer toward the nearest passable
            # border cell instead of declaring it blocked
            radius = int(2.0 / res)
            best = None
            for di in range(-radius, radius + 1):
                for dj in range(-radius, radius + 1):
                    a, b = ci + di, cj + dj
                    if 0 <= a < n and 0 <= b < m and field_cost[a, b] < self.config.planner.lethal_cost:
                        d = di * di + dj * dj
                        if best is None or d < best[0]:
                            best = (d, a, b)
            if best is not None:
                ci, cj = best[1], best[2]
        return ci, cj

    def _refresh_field(self, goal_xy) -> None:
        layer = score_traversability(self.tmap, self.config.thresholds)
        cost = compute_cost(layer, self.config.cost)
        lethal = self.config.planner.lethal_cost
        if self._blacklist:
            res = self.tmap.resolution
            n, m = cost.shape
            xs = self.tmap.origin[0] + (np.arange(n) + 0.5) * res
            ys = self.tmap.origin[1] + (np.arange(m) + 0.5) * res
            gx, gy = np.meshgrid(xs, ys, indexing="ij")
            for bx, by in self._blacklist:
                mask = (gx - bx) ** 2 + (gy - by) ** 2 <= self.config.planner.blacklist_radius ** 2
                cost[mask] = lethal + 1.0
        cell = self._goal_cell(cost, goal_xy)
        self._field = compute_gdf(
            cost, self.tmap.resolution, cell, lethal=lethal, origin=self.tmap.origin
        )
        self._field_time = self.t
        self._field_goal = goal_xy
        self._field_blacklist_version = self._blacklist_version
        self._last_trav_layer = layer

    def _autonomy_tick(self):
        if self.machine.phase != EXECUTING or self.plan is None:
            return (0.0, 0.0, 0.0)
        if self.machine.goal_index is None:
            return (0.0, 0.0, 0.0)
        if self.robot.trapped:
            return (0.0, 0.0, 0.0)
        wp = self.plan.waypoints[self.machine.goal_index]
        goal_xy = (wp.x, wp.y)
        est = self.estimate()
        stale = (
            self._field is None
            or self._field_goal != goal_xy
            or (self.t - self._field_time) >= self.config.planner.gdf_period
            or self._field_blacklist_version != self._blacklist_version
        )
        if stale:
            self._refresh_field(goal_xy)
        field = self._field
        goal_in_window = field.in_bounds(*field.cell_of(*goal_xy))
        if field.goal_blocked and goal_in_window:
            self._goal_unreachable("goal_in_lethal_region")
            return (0.0, 0.0, 0.0)
        cmd, signal = compute_velocity_command(
            field, est.x, est.y, est.yaw, goal_xy, self.limits
        )
        if signal == GOAL_REACHED:
            self._goals_reached += 1
            action = self.machine.step(self.plan, "goal_reached", self.t)
            self._on_action(action)
            return (0.0, 0.0, 0.0)
        dist = math.hypot(goal_xy[0] - est.x, goal_xy[1] - est.y)
        if signal == LOCAL_MINIMUM:
            # the robot's own cell reads unreachable (usually a conservative
            # no-go disk it brushed): crawl back to reachable space instead of
            # skipping; the progress monitor still catches genuine stalls
            escape = self._escape_command(field, est)
            if escape is not None:
                if self.monitor.update(self.t, dist) == "unreachable":
                    self._goal_unreachable("no_progress")
                    return (0.0, 0.0, 0.0)
                return escape
            self._goal_unreachable("no_route_in_field")
            return (0.0, 0.0, 0.0)
        if field.goal_blocked:
            self._goal_unreachable("no_route_in_field")
            return (0.0, 0.0, 0.0)
        if self.monitor.update(self.t, dist) == "unreachable":
            self._goal_unreachable("no_progress")
            return (0.0, 0.0, 0.0)
        return cmd

    def _escape_command(self, field, est) -> tuple[float, float, float] | None:
        """Slow crawl toward the nearest reachable cell, None if none nearby."""
        ri, rj = field.cell_of(est.x, est.y)
        res = field.resolution
        radius = int(3.0 / res)
        n, m = field.reachable.shape
        best = None
        for di in range(-radius, radius + 1):
            for dj in range(-radius, radius + 1):
                a, b = ri + di, rj + dj
                if 0 <= a < n and 0 <= b < m and field.reachable[a, b]:
                    d = di * di + dj * dj
                    if best is None or d < best[0]:
                        best = (d, a, b)
        if best is None:
            return None
        tx = field.origin[0] + (best[1] + 0.5) * res
        ty = field.origin[1] + (best[2] + 0.5) * res
        err = wrap_angle(math.atan2(ty - est.y, tx - est.x) - est.yaw)
        yaw_rate = float(np.clip(1.8 * err, -self.limits.yaw_rate, self.limits.yaw_rate))
        vx = 0.5 * self.limits.vx * max(0.0, math.cos(err))
        return (vx, 0.0, yaw_rate)

    def _goal_unreachable(self, reason: str) -> None:
        self._emit("event", {
            "kind": "goal_unreachable", "goal_index": self.machine.goal_index,
            "reason": reason,
        })
        action = self.machine.step(self.plan, "goal_unreachable", self.t)
        self.monitor.reset()
        self._on_action(action)

    # ------------------------------------------------------------- sensing

    def _scan_and_map(self) -> None:
        true_sensor = self._sensor_matrix(self._true_pose4())
        pts_sensor = scan_lidar(self.world, true_sensor, self.config.lidar, self.rng_lidar)
        self._scan_counter += 1
        if len(pts_sensor) == 0:
            return
        # mapping products only trust returns inside the effective range;
        # beyond it the pose-error lever arm smears the accumulated clouds
        ranges = np.linalg.norm(pts_sensor, axis=1)
        pts_sensor = pts_sensor[ranges <= self.config.lidar.effective_range]
        if len(pts_sensor) == 0:
            return
        est = self.estimate()
        est_sensor = self._sensor_matrix(est)
        pts_map = transform_points(est_sensor, pts_sensor)
        self.tmap.recenter(est.x, est.y)
        self.tmap.insert(pts_map)
        near = (
            np.linalg.norm(pts_sensor, axis=1) <= self.config.estimation.mapping_range
        )
        if not near.any():
            return
        odom_sensor = self._sensor_matrix(self.odom_pose)
        pts_odom = transform_points(odom_sensor, pts_sensor[near])
        if not self.accumulator.has_anchor and self.graph.nodes:
            last = self.graph.nodes[-1]
            self.accumulator.set_anchor(last.id, self.node_odom[last.id])
        self.accumulator.add_scan(pts_odom)

    def _node_and_closures(self) -> None:
        est = self.estimate()
        nid = self.graph.add_node(
            est,
            scan_ref=self._scan_counter,
            odom_delta=self.node_odom[self.graph.nodes[-1].id].delta_to(self.odom_pose),
            timestamp=self.t,
        )
        self.node_odom[nid] = self.odom_pose
        self.true_poses[nid] = self._true_pose4()
        closures = detect_loop_closures(
            self.graph, nid, self.true_poses, self.rng_registration,
            radius_band=self.config.estimation.loop_band,
            exclude_recent=self.config.estimation.loop_exclude_recent,
            effective_range=self.config.lidar.effective_range,
        )
        self._pending_closures += len(closures)
        optimize_due = (
            self._pending_closures > 0
            or nid % self.config.estimation.optimize_every_nodes == 0
        )
        max_delta = 0.0
        if optimize_due and len(self.graph.nodes) > 2:
            old_poses = {n.id: n.pose for n in self.graph.nodes}
            report = optimize_graph(self.graph)
            new_poses = {n.id: n.pose for n in self.graph.nodes}
            max_delta = max(
                (old_poses[i].distance_to(new_poses[i]) for i in old_poses), default=0.0
            )
            self._pending_closures = 0
            last = self.graph.nodes[-1]
            self.map_correction = last.pose.compose(self.node_odom[last.id].inverse())
            if max_delta >= self.config.estimation.reindex_min_delta:
                self.inventory.reindex(old_poses, new_poses)
            self._emit("graph_update", {
                "nodes": len(self.graph.nodes),
                "edges": len(self.graph.edges),
                "loops": sum(1 for e in self.graph.edges if e.kind == "loop"),
                "optimized": True,
                "cost_before": report.cost_before,
                "cost_after": report.cost_after,
                "max_delta": max_delta,
                "poses": [
                    [round(n.pose.x, 3), round(n.pose.y, 3)] for n in self.graph.nodes
                ],
            })
        else:
            self._emit("graph_update", {
                "nodes": len(self.graph.nodes),
                "edges": len(self.graph.edges),
                "loops": sum(1 for e in self.graph.edges if e.kind == "loop"),
                "optimized": False,
                "last_pose": [round(est.x, 3), round(est.y, 3), round(est.yaw, 4)],
            })

    def _process_payload(self, payload) -> None:
        try:
            terrain_model, ground = fit_terrain_cloth(payload.points)
        except DegenerateTerrain as err:
            self._emit("event", {"kind": "payload_degenerate", "id": payload.id,
                                 "reason": str(err)})
            return
        candidates = segment_trees(payload.points, terrain_model, ground)
        anchor_pose = self.graph.nodes[payload.anchor_node].pose
        touched = self.inventory.aggregate(
            candidates, terrain_model, payload.anchor_node, anchor_pose, payload.id
        )
        self.inventory.reestimate(sorted(set(touched)))
        payload.export(self._payload_dir, anchor_pose)
        for tid in sorted(set(touched)):
            inst = self.inventory.trees.get(tid)
            if inst is None:
                continue
            base = inst.base
            self._emit("tree_update", {
                "id": tid, "x": round(float(base[0]), 3), "y": round(float(base[1]), 3),
                "dbh": None if inst.dbh is None else round(inst.dbh, 4),
                "height": None if inst.height is None else round(inst.height, 2),
                "flags": sorted(inst.flags),
                "n_points": inst.n_points(),
            })
        self._emit("event", {
            "kind": "payload", "id": payload.id, "anchor": payload.anchor_node,
            "points": int(len(payload.points)), "candidates": len(candidates),
            "trees": len(self.inventory.trees),
        })

    # ------------------------------------------------------------ messages

    def _running_metrics(self) -> dict:
        traj = np.asarray(self.recorder.trajectory)
        records = list(self.intervention_records)
        if self._open_record is not None:
            records.append(InterventionRecord(
                start=self._open_record["start"], end=self.t,
                start_xy=self._open_record["start_xy"],
                end_xy=(self.robot.x, self.robot.y),
                cause=self._open_record["cause"],
            ))
        try:
            segments = compute_segments(traj, records)
            mdbi, mtbi = compute_mdbi_mtbi(segments)
        except ValueError:
            mdbi, mtbi = None, None
        dist = float(np.hypot(np.diff(traj[:, 1]), np.diff(traj[:, 2])).sum()) if len(traj) > 1 else 0.0
        return {
            "t": round(self.t, 2),
            "distance": round(dist, 2),
            "interventions": len(records),
            "mdbi": None if mdbi is None else round(mdbi, 2),
            "mtbi": None if mtbi is None else round(mtbi, 2),
            "trees": len(self.inventory.trees),
            "trees_with_dbh": sum(
                1 for i in self.inventory.trees.values() if i.dbh is not None
            ),
        }

    def _state_message(self) -> dict:
        est = self.estimate()
        return {
            "t": round(self.t, 3),
            "phase": self.machine.phase,
            "goal_index": self.machine.goal_index,
            "pose": {
                "x": round(est.x, 3), "y": round(est.y, 3),
                "z": round(est.z, 3), "yaw": round(est.yaw, 4),
            },
            "pose_true": {
                "x": round(self.robot.x, 3), "y": round(self.robot.y, 3),
                "z": round(self.robot.z, 3), "yaw": round(self.robot.yaw, 4),
            },
            "velocity": [
                round(self.robot.vx, 3), round(self.robot.vy, 3),
                round(self.robot.yaw_rate, 3),
            ],
            "trapped": self.robot.trapped,
        }

    def _terrain_message(self) -> dict:
        layer = getattr(self, "_last_trav_layer", None)
        if layer is None:
            layer = score_traversability(self.tmap, self.config.thresholds)
        stride = 4
        score = layer.score[::stride, ::stride]
        known = layer.known[::stride, ::stride]
        quantized = np.where(known, np.round(score * 100).astype(int), -1)
        return {
            "origin": [round(float(self.tmap.origin[0]), 2), round(float(self.tmap.origin[1]), 2)],
            "resolution": self.tmap.resolution * stride,
            "score_pct": quantized.tolist(),
        }

    # ---------------------------------------------------------------- tick

    def tick(self) -> list[dict]:
        """Advance one step of simulated time; returns messages to broadcast."""
        if self.done:
            return []
        self._out_messages = []
        dt = self.config.dt
        self.t = round(self.tick_count * dt + dt, 9)
        self.tick_count += 1

        due, rest = [], []
        for m in self._queue:
            (due if m.get("at", -math.inf) <= self.t else rest).append(m)
        self._queue = rest
        for msg in due:
            self._apply_command(msg)

        cmd = self._autonomy_tick()

        prev_true = self._true_pose4()
        self.robot = step_robot(
            self.world, self.robot, cmd, dt, self.limits,
            bush_speed_scale=self.config.robot.bush_speed_scale,
        )
        new_true = self._true_pose4()
        true_delta = prev_true.delta_to(new_true)
        meas = measure_odometry(true_delta, self.config.drift, self.rng_odom)
        self.odom_pose = self.odom_pose.compose(meas)
        step_len = math.hypot(meas.x, meas.y)
        self._travel_since_node += step_len
        self.accumulator.add_travel(step_len)

        if not self.robot.trapped and self.world.patch_at(self.robot.x, self.robot.y) is None:
            self._last_free_xy = (self.robot.x, self.robot.y)
        self._rescue_policy()

        if self.t - self._last_scan_t >= 1.0 / self.config.lidar.scan_rate - 1e-9:
            self._last_scan_t = self.t
            self._scan_and_map()

        if self._travel_since_node >= self.config.estimation.node_spacing:
            self._travel_since_node = 0.0
            self._node_and_closures()

        payload = self.accumulator.poll(self.t)
        if payload is not None:
            self._process_payload(payload)

        est = self.estimate()
        self.recorder.sample(self.t, (self.robot.x, self.robot.y), (est.x, est.y))

        if self.t - self._last_state_msg >= 1.0 / self.config.state_message_rate - 1e-9:
            self._last_state_msg = self.t
            self._emit("state", self._state_message())
        if self.t - self._last_metrics_msg >= 1.0 / self.config.metrics_message_rate - 1e-9:
            self._last_metrics_msg = self.t
            self._emit("metrics", self._running_metrics())
        if self.t - self._last_terrain_msg >= 1.0 / self.config.terrain_message_rate - 1e-9:
            self._last_terrain_msg = self.t
            self._emit("terrain_patch", self._terrain_message())

        if self.machine.phase == COMPLETED:
            self.done = True
        if self.t >= self.config.max_sim_time:
            self.aborted = True
            self.done = True
            self._emit("event", {"kind": "abort", "reason": "max_sim_time"})
        return self._out_messages

    # ------------------------------------------------------------ lifecycle

    def start_mission(self) -> None:
        self.submit({"type": "start", "at": 0.0})

    def run(self) -> MissionReport:
        """Headless: start (if idle and planned), loop to completion, finalize."""
        scripted_start = self.config.policy.mode == "scripted" and any(
            c.get("type") == "start" for c in self.config.policy.scripted
        )
        if self.machine.phase == IDLE and self.plan is not None and not scripted_start:
            self.start_mission()
        while not self.done:
            try:
                self.tick()
            except Exception:
                self._dump_diagnostics()
                raise
        return self.finalize()

    def _dump_diagnostics(self) -> None:
        out = Path(self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        dump = {
            "t": self.t,
            "phase": self.machine.phase,
            "goal_index": self.machine.goal_index,
            "robot": self._state_message(),
            "nodes": len(self.graph.nodes),
            "trees": len(self.inventory.trees),
        }
        (out / "diagnostic_dump.json").write_text(json.dumps(dump, indent=2))
        self.recorder.save(out / "events.jsonl")

    def finalize(self) -> MissionReport:
        out = Path(self.config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        if self._open_record is not None:
            self._close_intervention()

        if len(self.graph.nodes) > 2:
            old_poses = {n.id: n.pose for n in self.graph.nodes}
            optimize_graph(self.graph)
            new_poses = {n.id: n.pose for n in self.graph.nodes}
            max_delta = max(
                (old_poses[i].distance_to(new_poses[i]) for i in old_poses), default=0.0
            )
            if max_delta > 0:
                self.inventory.reindex(old_poses, new_poses)
        self.inventory.reestimate()
        self.inventory.flag_fov_limits(
            self.config.lidar.vertical_fov,
            HIP_HEIGHT + self.config.robot.sensor_offset,
        )

        exports = export_marteloscope(self.inventory, out)
        self.inventory.save_json(out / "inventory.json")
        self.graph.export_g2o(out / "posegraph.g2o")
        if self.plan is not None:
            self.plan.save(out / "plan.json")
        self.world.export_tree_table(out / "world_trees.json")
        if self.config.export_world_cloud:
            self.world.export_ply(out / "world_truth.ply")
        self.recorder.save(out / "events.jsonl")
        config_path = out / "config.json"
        self.config.save(config_path)

        counts = self.plan.counts() if self.plan else {"reached": 0, "skipped": 0}
        report = build_report(
            np.asarray(self.recorder.trajectory),
            self.intervention_records,
            effective_range=self.config.lidar.effective_range,
            tree_count=len(self.inventory.trees),
            trees_with_dbh=sum(
                1 for i in self.inventory.trees.values() if i.dbh is not None
            ),
            goals_reached=counts.get("reached", 0),
            goals_skipped=counts.get("skipped", 0),
            completed=self.machine.phase == COMPLETED and not self.aborted,
            config_echo=self.config.to_dict(),
        )
        report.export_paths = {
            "marteloscope_csv": str(exports["csv"].name),
            "marteloscope_geojson": str(exports["geojson"].name),
            "marteloscope_svg": str(exports["svg"].name),
            "inventory": "inventory.json",
            "posegraph": "posegraph.g2o",
            "events": "events.jsonl",
        }
        report.save(out / "report.json")
        return report
