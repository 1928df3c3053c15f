"""Pydantic request/response models for the feedback service."""

from __future__ import annotations

from pydantic import BaseModel, field_validator


class StatementScoreModel(BaseModel):
    statement: str
    score: float
    witness: str


class ExpertModel(BaseModel):
    per_statement: list[StatementScoreModel]
    p_incompetent: float
    p_competent: float


class StateResponse(BaseModel):
    """Snapshot of the replay: the most recently assessed frame plus whether
    the engine is waiting on feedback."""

    frame_index: int | None = None
    p_known: float | None = None
    verdict: str | None = None
    competence_score: float | None = None
    pending_request: bool
    expert: ExpertModel | None = None
    finished: bool
    frames_total: int


class FeedbackRequest(BaseModel):
    """Operator judgment for the pending frame. ``frame_index`` guards
    against racing a replay that has already moved on."""

    label: str
    frame_index: int | None = None

    @field_validator("label")
    @classmethod
    def _known_label(cls, value: str) -> str:
        normalized = value.strip().lower()
        if normalized not in ("competent", "incompetent"):
            raise ValueError("label must be 'competent' or 'incompetent'")
        return normalized


class FeedbackResponse(BaseModel):
    applied: bool
    frame_index: int


class StepResponse(BaseModel):
    stepped: bool


class FeedbackInfoModel(BaseModel):
    label: str
    source: str


class EventModel(BaseModel):
    frame_index: int
    p_known: float
    verdict: str
    competence_score: float | None = None
    action: str
    feedback: FeedbackInfoModel | None = None
    expert: ExpertModel | None = None
    wall_time: float
