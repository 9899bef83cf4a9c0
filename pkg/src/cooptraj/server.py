"""HTTP/WebSocket transport for live sessions.

One WebSocket connection carries one session. The transport is a thin
shell around :class:`cooptraj.session.SessionService`: every inbound
JSON message is routed through the service and the replies are sent
back; once the negotiation reaches agreed, the execution ticks are
streamed at the configured real-time factor (0 = as fast as possible).
The UI client is served as static assets when a directory is provided.
"""

from __future__ import annotations

import asyncio
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .session import PROTOCOL_VERSION, SessionService

__all__ = ["create_app"]


def create_app(
    service: Optional[SessionService] = None,
    realtime_factor: float = 0.0,
    ui_dir: Optional[str] = None,
) -> FastAPI:
    service = service or SessionService(clock=time.monotonic)
    app = FastAPI(title="cooptraj session service")
    app.state.service = service
    app.state.realtime_factor = realtime_factor

    @app.get("/healthz")
    async def healthz():
        return JSONResponse({"ok": True, "protocol_version": PROTOCOL_VERSION})

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        session_id: Optional[str] = None
        try:
            while True:
                message = await ws.receive_json()
                replies = service.handle(message)
                if session_id is None:
                    for reply in replies:
                        if reply.get("session"):
                            session_id = reply["session"]
                            break
                agreed = False
                for reply in replies:
                    await ws.send_json(reply)
                    agreed = agreed or reply.get("kind") == "agreed"
                if agreed and session_id is not None:
                    engine = service.get(session_id)
                    if engine is not None and engine.phase == "agreed":
                        await _stream_execution(ws, engine, app.state.realtime_factor)
        except WebSocketDisconnect:
            if session_id is not None:
                service.mark_disconnected(session_id)

    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


async def _stream_execution(ws: WebSocket, engine, realtime_factor: float) -> None:
    dt_sim = engine.scenario.sim.dt_sim
    pause = dt_sim / realtime_factor if realtime_factor > 0 else 0.0
    for tick in engine.execution_ticks():
        await ws.send_json(tick)
        if pause:
            await asyncio.sleep(pause)
