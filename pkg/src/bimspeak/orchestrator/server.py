"""HTTP + WebSocket wire protocol over the engine.

Pipeline work runs in worker threads (the engine is synchronous); each
WebSocket connection runs two loops, one draining the session's event queue
outward and one dispatching client messages inward.
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from typing import Optional

import anyio
from fastapi import FastAPI, HTTPException, UploadFile, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from ..errors import BimspeakError, GatewayError, ProtocolError, SessionClosedError
from ..kernel import project_to_dict
from .engine import Engine

CLIENT_MESSAGE_TYPES = ("utterance", "answer", "upload_audio_ref")


def create_app(engine: Engine, static_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="bimspeak", version="0.1.0")
    app.state.engine = engine

    @app.post("/sessions")
    def create_session() -> dict:
        session = engine.create_session()
        return {"session_id": session.id}

    def _session(session_id: str):
        try:
            return engine.get_session(session_id)
        except SessionClosedError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc

    @app.get("/sessions/{session_id}/project")
    def get_project(session_id: str) -> dict:
        return project_to_dict(_session(session_id).project)

    @app.get("/sessions/{session_id}/trace/{turn}")
    def get_trace(session_id: str, turn: int) -> dict:
        trace = _session(session_id).trace_for_turn(turn)
        if trace is None:
            raise HTTPException(status_code=404, detail=f"no trace for turn {turn}")
        return trace.to_json_dict()

    @app.post("/sessions/{session_id}/audio")
    async def post_audio(session_id: str, file: UploadFile) -> dict:
        session = _session(session_id)
        audio = await file.read()
        digest = hashlib.sha256(audio).hexdigest()
        engine.audio_store[digest] = audio
        media_type = file.content_type or "audio/wav"
        try:
            transcript = await anyio.to_thread.run_sync(engine.transcribe, session, audio, media_type)
            outcome = await anyio.to_thread.run_sync(engine.handle_utterance, session, transcript.text)
        except BimspeakError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {
            "transcript": {
                "text": transcript.text,
                "language_tag": transcript.language_tag,
                "duration": transcript.duration,
            },
            "digest": digest,
            "outcome": {"status": outcome.status, "turn": outcome.turn},
        }

    @app.websocket("/sessions/{session_id}/events")
    async def events(ws: WebSocket, session_id: str) -> None:
        try:
            session = engine.get_session(session_id)
        except SessionClosedError:
            await ws.close(code=4404)
            return
        await ws.accept()
        subscription = engine.subscribe_events(session)

        async def forward_events() -> None:
            while True:
                event = await anyio.to_thread.run_sync(lambda: subscription.get(timeout=None))
                if event is None:
                    return
                try:
                    await ws.send_json(event)
                except (WebSocketDisconnect, RuntimeError):
                    return

        async def dispatch(message: dict) -> None:
            kind = message.get("type")
            try:
                if kind == "utterance":
                    await anyio.to_thread.run_sync(engine.handle_utterance, session, message.get("text", ""))
                elif kind == "answer":
                    await anyio.to_thread.run_sync(engine.answer_question, session, message.get("text", ""))
                elif kind == "upload_audio_ref":
                    audio = engine.audio_store.get(message.get("ref", ""))
                    if audio is None:
                        await ws.send_json({"type": "error", "message": "unknown audio reference"})
                        return
                    transcript = await anyio.to_thread.run_sync(engine.transcribe, session, audio, "audio/wav")
                    await ws.send_json({"type": "transcript", "text": transcript.text})
                    await anyio.to_thread.run_sync(engine.handle_utterance, session, transcript.text)
                else:
                    await ws.send_json({"type": "error", "message": f"unknown message type {kind!r}"})
            except (ProtocolError, GatewayError) as exc:
                await ws.send_json({"type": "error", "message": str(exc)})

        async def receive_messages() -> None:
            while True:
                try:
                    message = await ws.receive_json()
                except (WebSocketDisconnect, RuntimeError):
                    return
                await dispatch(message)

        async with anyio.create_task_group() as tg:
            tg.start_soon(forward_events)
            try:
                await receive_messages()
            finally:
                # wakes forward_events' blocking get(); never abandon its thread
                session.bus.unsubscribe(subscription)

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")

    return app
