"""Replay a recorded event log as the original broadcast stream."""

from __future__ import annotations

import asyncio
import json
import logging
import warnings
from pathlib import Path

log = logging.getLogger(__name__)


def _load_out_lines(log_path) -> list[str]:
    """Raw broadcast payload strings, bit-identical to the original emission."""
    out = []
    text = Path(log_path).read_text()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
        except json.JSONDecodeError:
            warnings.warn(
                f"event log truncated at line {lineno}; replaying the prefix"
            )
            break
        if entry.get("dir") == "out":
            out.append(json.dumps(entry["msg"], sort_keys=True))
    return out


def _message_time(raw: str) -> float | None:
    msg = json.loads(raw)
    data = msg.get("data", {})
    t = data.get("t")
    return float(t) if isinstance(t, (int, float)) else None


def iter_replay(log_path, speed: float = 1.0):
    """Yield the broadcast message strings in original order.

    Speed only affects pacing (see schedule_replay); payloads are untouched.
    """
    yield from _load_out_lines(log_path)


def schedule_replay(log_path, speed: float = 1.0):
    """Yield (delay_seconds, raw_message) pairs at timestamps compressed by speed."""
    if speed <= 0:
        raise ValueError("speed must be > 0")
    last_t = None
    for raw in _load_out_lines(log_path):
        t = _message_time(raw)
        delay = 0.0
        if t is not None:
            if last_t is not None and t > last_t:
                delay = (t - last_t) / speed
            last_t = t
        yield delay, raw


def serve_replay(log_path, port: int, speed: float = 1.0, host: str = "127.0.0.1"):
    """Host the replay stream over the same WebSocket surface as the live service."""
    import uvicorn
    from fastapi import FastAPI, WebSocket, WebSocketDisconnect

    app = FastAPI(title="forestbench replay")

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        try:
            for delay, raw in schedule_replay(log_path, speed):
                if delay > 0:
                    await asyncio.sleep(min(delay, 5.0))
                await ws.send_text(raw)
            await ws.close()
        except WebSocketDisconnect:
            pass

    log.info("replaying %s on ws://%s:%d/ws", log_path, host, port)
    uvicorn.run(app, host=host, port=port, log_level="warning")
