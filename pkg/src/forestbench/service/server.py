"""Live mission service: one session, many viewers, one commanding client."""

from __future__ import annotations

import asyncio
import contextlib
import json
import logging

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..mission.session import MissionSession

log = logging.getLogger(__name__)


class SessionHub:
    """Owns the tick loop; fans out broadcast messages to connected clients."""

    def __init__(
        self, session: MissionSession, speed: float = 1.0, wait_for_client: bool = True
    ):
        self.session = session
        self.speed = max(speed, 1e-3)
        self.wait_for_client = wait_for_client
        self.clients: list[WebSocket] = []
        self.commander: WebSocket | None = None
        self._client_seq: dict[int, int] = {}
        self.finished = False
        self._lock = asyncio.Lock()

    async def broadcast(self, messages: list[dict]) -> None:
        if not messages or not self.clients:
            return
        payloads = [json.dumps(m, sort_keys=True) for m in messages]
        dead = []
        for ws in self.clients:
            try:
                for p in payloads:
                    await ws.send_text(p)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.drop(ws)

    def drop(self, ws: WebSocket) -> None:
        if ws in self.clients:
            self.clients.remove(ws)
        self._client_seq.pop(id(ws), None)
        if self.commander is ws:
            self.commander = None  # next commanding attempt takes the lock

    def snapshot_messages(self) -> list[dict]:
        s = self.session
        trees = []
        for tid in sorted(s.inventory.trees):
            inst = s.inventory.trees[tid]
            base = inst.base
            trees.append({
                "id": tid, "x": round(float(base[0]), 3), "y": round(float(base[1]), 3),
                "dbh": None if inst.dbh is None else round(inst.dbh, 4),
                "height": None if inst.height is None else round(inst.height, 2),
                "flags": sorted(inst.flags),
                "n_points": inst.n_points(),
            })
        snap = {
            "kind": "snapshot",
            "state": s._state_message(),
            "metrics": s._running_metrics(),
            "trees": trees,
            "plan": None if s.plan is None else json.loads(s.plan.to_json()),
            "finished": self.finished,
        }
        return [{"type": "event", "seq": 0, "data": snap}]

    async def handle_client_message(self, ws: WebSocket, raw: str) -> None:
        try:
            msg = json.loads(raw)
            if not isinstance(msg, dict) or "type" not in msg:
                raise ValueError("expected an object with a 'type' field")
        except (json.JSONDecodeError, ValueError) as err:
            await ws.send_text(json.dumps({
                "type": "event", "seq": 0,
                "data": {"kind": "reject", "command": "?", "reason": f"malformed message: {err}"},
            }, sort_keys=True))
            return
        seq = msg.get("seq")
        last = self._client_seq.get(id(ws), 0)
        if seq is not None and seq <= last:
            await ws.send_text(json.dumps({
                "type": "event", "seq": 0,
                "data": {"kind": "reject", "command": msg.get("type"),
                         "reason": f"sequence number {seq} not increasing (last {last})"},
            }, sort_keys=True))
            return
        if seq is not None:
            self._client_seq[id(ws)] = seq
        if msg.get("type") == "set_params" and (msg.get("data") or {}).get("release_command_lock"):
            if self.commander is ws:
                self.commander = None
            await ws.send_text(json.dumps({
                "type": "event", "seq": 0,
                "data": {"kind": "ack", "command": "set_params",
                         "applied": {"release_command_lock": True},
                         "cmd_seq": seq},
            }, sort_keys=True))
            return
        async with self._lock:
            if self.commander is None:
                self.commander = ws
            if self.commander is not ws:
                await ws.send_text(json.dumps({
                    "type": "event", "seq": 0,
                    "data": {"kind": "reject", "command": msg.get("type"),
                             "reason": "another client holds the command lock",
                             "cmd_seq": seq},
                }, sort_keys=True))
                return
            self.session.submit(msg)

    async def run_loop(self) -> None:
        dt = self.session.config.dt
        try:
            while self.wait_for_client and not self.clients:
                await asyncio.sleep(0.01)
            while not self.session.done:
                messages = self.session.tick()
                await self.broadcast(messages)
                await asyncio.sleep(dt / self.speed)
            report = self.session.finalize()
            self.finished = True
            await self.broadcast([{
                "type": "metrics", "seq": self.session.seq + 1,
                "data": {"final": True, **json.loads(report.to_json())},
            }])
        except asyncio.CancelledError:
            raise
        except Exception:
            log.exception("mission loop failed")
            raise


def create_app(
    session: MissionSession, speed: float = 1.0, wait_for_client: bool = True
) -> FastAPI:
    hub = SessionHub(session, speed, wait_for_client)

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(hub.run_loop())
        yield
        task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await task

    app = FastAPI(title="forestbench mission service", lifespan=lifespan)
    app.state.hub = hub

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        hub.clients.append(ws)
        for msg in hub.snapshot_messages():
            await ws.send_text(json.dumps(msg, sort_keys=True))
        try:
            while True:
                raw = await ws.receive_text()
                await hub.handle_client_message(ws, raw)
        except WebSocketDisconnect:
            hub.drop(ws)

    @app.get("/healthz")
    async def health():
        return {"ok": True, "t": session.t, "done": session.done}

    return app
