"""HTTP API over sessions — the surface the web UI and scripts consume.

Routes:
    POST /sessions                    -> {"id": ...}
    POST /sessions/{id}/image        multipart PNG/JPEG upload
    POST /sessions/{id}/mask         multipart PNG mask (optional region for
                                     masked executors)
    POST /sessions/{id}/turns        {"instruction": ...}
    POST /sessions/{id}/undo
    GET  /sessions/{id}/history
    GET  /sessions/{id}/image        current version as PNG
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .errors import DecodeError, NothingToUndo, SessionError, SizeLimit
from .imaging import BinaryMask
from .session import RuntimeDeps, SessionStore, run_turn, set_mask, undo, upload


class TurnBody(BaseModel):
    instruction: str


def _image_url(session_id: str, depth: int) -> str:
    return f"/sessions/{session_id}/image?v={depth}"


def create_app(
    deps: RuntimeDeps,
    store: Optional[SessionStore] = None,
    frontend_dir: Optional[Path] = None,
) -> FastAPI:
    app = FastAPI(title="chatedit")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    sessions = store or SessionStore()
    app.state.store = sessions
    app.state.deps = deps

    @app.exception_handler(SessionError)
    async def _session_error(request: Request, exc: SessionError):
        status = 404
        if isinstance(exc, NothingToUndo):
            status = 409
        elif isinstance(exc, SizeLimit):
            status = 413
        elif isinstance(exc, DecodeError):
            status = 400
        return JSONResponse({"error": str(exc)}, status_code=status)

    @app.post("/sessions")
    def create_session():
        session = sessions.create()
        return {"id": session.id}

    @app.post("/sessions/{session_id}/image")
    async def upload_image(session_id: str, file: UploadFile):
        session = sessions.get(session_id)
        raw = await file.read()
        upload(session, raw, deps.upload_size_limit)
        image = session.current_image()
        return {
            "width": image.width,
            "height": image.height,
            "stack_depth": session.stack_depth(),
            "image_url": _image_url(session.id, session.stack_depth()),
        }

    @app.post("/sessions/{session_id}/mask")
    async def upload_mask(session_id: str, file: UploadFile):
        session = sessions.get(session_id)
        raw = await file.read()
        try:
            mask = BinaryMask.from_bytes(raw)
        except DecodeError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        set_mask(session, mask)
        return {"mask_area": mask.area}

    @app.post("/sessions/{session_id}/turns")
    def post_turn(session_id: str, body: TurnBody):
        session = sessions.get(session_id)
        outcome = run_turn(session, body.instruction, deps)
        return {
            "reply": outcome.reply,
            "image_url": _image_url(session.id, session.stack_depth()),
            "plan": {
                "functions": outcome.plan.resolved_names(),
                "partial": outcome.plan.partial,
            },
            "token_usage": outcome.plan.token_usage,
            "token_total": session.token_total,
            "stack_depth": session.stack_depth(),
        }

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        session = sessions.get(session_id)
        undo(session)
        return {
            "stack_depth": session.stack_depth(),
            "image_url": _image_url(session.id, session.stack_depth()),
        }

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        session = sessions.get(session_id)
        return {
            "turns": [
                {
                    "instruction": t.instruction,
                    "reply": t.reply,
                    "functions": list(t.functions),
                    "ok": t.ok,
                    "token_usage": t.token_usage,
                }
                for t in session.history
            ],
            "stack_depth": session.stack_depth(),
            "token_total": session.token_total,
        }

    @app.get("/sessions/{session_id}/image")
    def get_image(session_id: str, v: Optional[int] = None):
        session = sessions.get(session_id)
        png = session.current_image().to_png_bytes()
        return Response(content=png, media_type="image/png")

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(frontend_dir), html=True), name="ui")

    return app
