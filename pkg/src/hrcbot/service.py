"""HTTP + stream service around one session.

Request/response endpoints (JSON):

    POST /task          {"text": ...}                 submit a command
    POST /pause                                        freeze at a motion boundary
    POST /resume                                       continue (after teach)
    POST /clarify       {"answer": ...}                answer the pending question
    POST /skill/commit  {"recording_id", "name"?, "confirm_replace"?}
    GET  /plan /scene /library /state                  snapshots

One bidirectional stream per session at /stream. Server frames carry
{"type": "state" | "scene_delta" | "log" | "question"}; the client sends
{"type": "demo_sample", t, x, y, z, aperture} at up to 60 Hz and
{"type": "demo_end"} to finish a recording. A demo_sample arriving while
paused starts the demonstration implicitly.

Execution is driven by a background loop that ticks one motion at a time and
broadcasts the resulting deltas, so a pause can never split a motion.
"""

from __future__ import annotations

import asyncio
import contextlib

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .session import Session, SessionError, SessionRejection


class TaskRequest(BaseModel):
    text: str


class ClarifyRequest(BaseModel):
    answer: str


class CommitRequest(BaseModel):
    recording_id: str | None = None
    name: str | None = None
    confirm_replace: bool = False


class StreamHub:
    """At most one live client; frames to a dead socket are dropped."""

    def __init__(self):
        self.socket: WebSocket | None = None

    async def attach(self, socket: WebSocket) -> None:
        if self.socket is not None:
            with contextlib.suppress(Exception):
                await self.socket.close()
        self.socket = socket

    def detach(self, socket: WebSocket) -> None:
        if self.socket is socket:
            self.socket = None

    async def send(self, frame: dict) -> None:
        if self.socket is None:
            return
        try:
            await self.socket.send_json(frame)
        except Exception:
            self.socket = None


def create_app(session: Session, motion_delay: float = 0.0) -> FastAPI:
    hub = StreamHub()

    @contextlib.asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.runner = asyncio.create_task(runner())
        try:
            yield
        finally:
            app.state.runner.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await app.state.runner

    app = FastAPI(title="hrcbot session service", lifespan=lifespan)
    app.state.session = session

    async def broadcast_state() -> None:
        await hub.send({"type": "state", **session.state_view()})
        if session.pending_question:
            await hub.send({"type": "question", "text": session.pending_question})

    async def broadcast_tick() -> None:
        if session.sim.event_log:
            record = session.sim.event_log[-1]
            await hub.send({
                "type": "scene_delta",
                "t": record["t"],
                "robot": record["robot"],
                "changed_objects": record["changed_objects"],
            })
            await hub.send({"type": "log", "record": record})

    async def runner() -> None:
        while True:
            if session.phase == "executing":
                session.tick()
                await broadcast_tick()
                await broadcast_state()
                await asyncio.sleep(motion_delay)
            else:
                await asyncio.sleep(0.005)

    def rejection(err: Exception, status: int = 409) -> JSONResponse:
        return JSONResponse({"error": str(err)}, status_code=status)

    @app.post("/task")
    async def submit_task(body: TaskRequest):
        try:
            record = session.submit_task(body.text)
        except SessionRejection as err:
            return rejection(err)
        await broadcast_state()
        return {"state": session.state_view(), "plan": session.plan_view(),
                "failure": session.state_view()["last_outcome"] if record else None}

    @app.post("/pause")
    async def pause():
        try:
            session.pause()
        except SessionRejection as err:
            return rejection(err)
        await broadcast_state()
        return session.state_view()

    @app.post("/resume")
    async def resume():
        try:
            session.resume()
        except SessionRejection as err:
            return rejection(err)
        await broadcast_state()
        return session.state_view()

    @app.post("/clarify")
    async def clarify(body: ClarifyRequest):
        try:
            session.clarify(body.answer)
        except SessionRejection as err:
            return rejection(err)
        await broadcast_state()
        return session.state_view()

    @app.post("/skill/commit")
    async def commit(body: CommitRequest):
        pending = session.pending_recording
        if body.recording_id and (pending is None or pending.recording_id != body.recording_id):
            return rejection(SessionError(f"no pending recording {body.recording_id!r}"), 404)
        try:
            record = session.commit_skill(
                name_override=body.name, confirm_replace=body.confirm_replace
            )
        except (SessionRejection, SessionError) as err:
            await broadcast_state()
            return rejection(err)
        await broadcast_state()
        return {"committed": record.name, "version": record.version,
                "state": session.state_view()}

    @app.get("/state")
    async def get_state():
        return session.state_view()

    @app.get("/plan")
    async def get_plan():
        return session.plan_view()

    @app.get("/scene")
    async def get_scene():
        return session.scene_view()

    @app.get("/library")
    async def get_library():
        return session.library_view()

    @app.websocket("/stream")
    async def stream(socket: WebSocket):
        await socket.accept()
        await hub.attach(socket)
        await broadcast_state()
        try:
            while True:
                frame = await socket.receive_json()
                kind = frame.get("type")
                if kind == "demo_sample":
                    if session.phase == "paused":
                        session.demo_start()
                        await broadcast_state()
                    if session.phase != "demonstrating":
                        await hub.send({
                            "type": "log",
                            "record": {"warning": f"demo_sample ignored in {session.phase}"},
                        })
                        continue
                    out = session.feed_demo_sample(
                        float(frame["t"]),
                        [float(frame["x"]), float(frame["y"]), float(frame["z"])],
                        float(frame.get("aperture", 1.0)),
                    )
                    await hub.send({
                        "type": "scene_delta",
                        "t": session.sim.t,
                        "robot": session.sim.state.snapshot(),
                        "changed_objects": [],
                        "demo": out,
                    })
                    if out.get("aborted"):
                        await broadcast_state()
                elif kind == "demo_end":
                    if session.phase == "demonstrating":
                        session.demo_end()
                    await broadcast_state()
                else:
                    await hub.send({
                        "type": "log",
                        "record": {"warning": f"unknown frame type {kind!r}"},
                    })
        except WebSocketDisconnect:
            hub.detach(socket)

    return app


def serve(session: Session, host: str = "127.0.0.1", port: int = 8765,
          motion_delay: float = 0.02) -> None:
    import uvicorn

    uvicorn.run(create_app(session, motion_delay=motion_delay), host=host, port=port,
                log_level="warning")
