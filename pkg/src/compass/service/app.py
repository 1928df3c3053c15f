"""HTTP surface for the human-in-the-loop feedback panel.

Endpoints:

* ``GET  /api/state``              current frame snapshot + pending flag
* ``POST /api/feedback``           operator judgment (409 when not pending)
* ``POST /api/step``               advance one frame under manual pacing
* ``GET  /api/events``             full event log so far
* ``GET  /api/frame/{index}/image`` bytes of the frame's image file

When a panel directory is supplied its static assets are mounted at ``/``.
"""

from __future__ import annotations

import os.path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .schemas import (
    EventModel,
    FeedbackRequest,
    FeedbackResponse,
    StateResponse,
    StepResponse,
)
from .session import ReplaySession

__all__ = ["create_app"]


def create_app(session: ReplaySession, panel_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="compass feedback service", version="0.1.0")

    @app.get("/api/state", response_model=StateResponse)
    def get_state() -> dict:
        return session.state()

    @app.post("/api/feedback", response_model=FeedbackResponse)
    def post_feedback(request: FeedbackRequest) -> FeedbackResponse:
        applied_to = session.submit_feedback(request.label, request.frame_index)
        if applied_to is None:
            raise HTTPException(status_code=409, detail="no matching pending feedback request")
        return FeedbackResponse(applied=True, frame_index=applied_to)

    @app.post("/api/step", response_model=StepResponse)
    def post_step() -> StepResponse:
        if not session.step():
            raise HTTPException(status_code=409, detail="stepping is not available right now")
        return StepResponse(stepped=True)

    @app.get("/api/events", response_model=list[EventModel])
    def get_events() -> list[dict]:
        return session.events()

    @app.get("/api/frame/{index}/image")
    def get_frame_image(index: int) -> FileResponse:
        image_ref = session.frame_image_ref(index)
        if image_ref is None or not os.path.isfile(image_ref):
            raise HTTPException(status_code=404, detail="frame has no image")
        return FileResponse(image_ref)

    if panel_dir is not None:
        app.mount("/", StaticFiles(directory=panel_dir, html=True), name="panel")

    return app
