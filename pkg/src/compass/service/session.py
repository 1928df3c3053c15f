"""Threaded replay controller behind the HTTP surface.

The replay loop runs on one background thread that owns the memory; HTTP
handlers only read snapshots and hand in feedback/step signals through a
condition variable, so at most one feedback request is pending at any time
and each submission is applied at most once.
"""

from __future__ import annotations

import threading
from typing import Any

from ..assessment import Assessment, CompetenceLabel, CompetenceMemory, FeedbackSource
from ..errors import EngineError
from ..replay import ExpertContext, Feedback, RunReport, replay, write_report
from ..semantics import ExpertAssessment
from ..space import CalibrationModel
from ..storage import EpisodeFrame, PathLike, StoredRun, save_run

__all__ = ["ReplaySession", "SessionStopped"]


class SessionStopped(Exception):
    """Raised inside the replay thread when the session shuts down."""


def _expert_dict(view: ExpertAssessment | None) -> dict[str, Any] | None:
    if view is None:
        return None
    return {
        "per_statement": [
            {"statement": str(s.statement), "score": s.score, "witness": s.witness}
            for s in view.per_statement
        ],
        "p_incompetent": view.p_incompetent,
        "p_competent": view.p_competent,
    }


class ReplaySession:
    def __init__(
        self,
        frames: list[EpisodeFrame],
        calibration: CalibrationModel,
        memory: CompetenceMemory,
        threshold: float,
        expert: ExpertContext | None = None,
        pace_ms: int = 500,
        manual: bool = False,
        state_path: PathLike | None = None,
        report_path: PathLike | None = None,
    ) -> None:
        self._frames = frames
        self._calibration = calibration
        self._initial_memory = memory
        self._threshold = threshold
        self._expert = expert
        self._pace_ms = pace_ms
        self._manual = manual
        self._state_path = state_path
        self._report_path = report_path

        # Reentrant so wait_until predicates may call the snapshot accessors.
        self._lock = threading.RLock()
        self._cond = threading.Condition(self._lock)
        self._current: dict[str, Any] | None = None
        self._pending_frame: int | None = None
        self._submitted_label: CompetenceLabel | None = None
        self._step_tokens = 0
        self._events: list[dict[str, Any]] = []
        self._finished = False
        self._stopped = False
        self._error: str | None = None
        self._report: RunReport | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle ---------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="replay", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        with self._cond:
            self._stopped = True
            self._cond.notify_all()
        if self._thread is not None:
            self._thread.join(timeout=5.0)

    def _run(self) -> None:
        try:
            report, final_memory = replay(
                self._frames,
                self._calibration,
                self._initial_memory,
                self._threshold,
                provider=self._provider,
                expert=self._expert,
                on_assess=self._on_assess,
                on_event=self._on_event,
                gate=self._gate,
            )
            if self._state_path is not None:
                save_run(StoredRun(calibration=self._calibration, memory=final_memory), self._state_path)
            if self._report_path is not None:
                write_report(report, self._report_path)
            with self._cond:
                self._report = report
        except SessionStopped:
            pass
        except EngineError as exc:
            with self._cond:
                self._error = str(exc)
        finally:
            with self._cond:
                self._finished = True
                self._cond.notify_all()

    # -- replay-thread hooks -------------------------------------------------

    def _on_assess(self, frame: EpisodeFrame, result: Assessment, expert: ExpertAssessment | None) -> None:
        with self._cond:
            self._current = {
                "frame_index": frame.frame_index,
                "p_known": result.p_known,
                "verdict": result.verdict.value,
                "competence_score": result.competence_score,
                "expert": _expert_dict(expert),
            }

    def _provider(self, frame: EpisodeFrame, assessment: Assessment) -> Feedback:
        with self._cond:
            self._pending_frame = frame.frame_index
            self._cond.notify_all()
            while self._submitted_label is None and not self._stopped:
                self._cond.wait(0.1)
            if self._stopped:
                raise SessionStopped()
            label = self._submitted_label
            self._submitted_label = None
            self._pending_frame = None
            self._cond.notify_all()
        assert label is not None
        return Feedback(label=label, source=FeedbackSource.HUMAN)

    def _on_event(self, event: Any, memory: CompetenceMemory) -> None:
        with self._cond:
            self._events.append(event.to_json_dict())

    def _gate(self, frame: EpisodeFrame) -> None:
        if self._manual:
            with self._cond:
                while self._step_tokens == 0 and not self._stopped:
                    self._cond.wait(0.1)
                if self._stopped:
                    raise SessionStopped()
                self._step_tokens -= 1
        elif self._pace_ms > 0:
            with self._cond:
                if self._stopped:
                    raise SessionStopped()
                self._cond.wait(self._pace_ms / 1000.0)
                if self._stopped:
                    raise SessionStopped()

    # -- HTTP-facing snapshot and signals -------------------------------------

    def state(self) -> dict[str, Any]:
        with self._cond:
            snapshot: dict[str, Any] = {
                "frame_index": None,
                "p_known": None,
                "verdict": None,
                "competence_score": None,
                "expert": None,
            }
            if self._current is not None:
                snapshot.update(self._current)
            snapshot["pending_request"] = self._pending_frame is not None
            snapshot["finished"] = self._finished
            snapshot["frames_total"] = len(self._frames)
            return snapshot

    def events(self) -> list[dict[str, Any]]:
        with self._cond:
            return list(self._events)

    def submit_feedback(self, label: str, frame_index: int | None = None) -> int | None:
        """Apply operator feedback to the pending frame.

        Returns the frame index the label was applied to, or None when there
        is no matching pending request (the 409 path).
        """
        parsed = CompetenceLabel.parse(label)
        with self._cond:
            if self._pending_frame is None or self._submitted_label is not None:
                return None
            if frame_index is not None and frame_index != self._pending_frame:
                return None
            applied_to = self._pending_frame
            self._submitted_label = parsed
            self._cond.notify_all()
            return applied_to

    def step(self) -> bool:
        """Advance one frame in manual pacing; refused while feedback is
        pending or after the replay finished."""
        with self._cond:
            if not self._manual or self._finished or self._pending_frame is not None:
                return False
            self._step_tokens += 1
            self._cond.notify_all()
            return True

    def frame_image_ref(self, frame_index: int) -> str | None:
        for frame in self._frames:
            if frame.frame_index == frame_index:
                return frame.descriptor.image_ref
        return None

    def wait_until(self, predicate: Any, timeout: float = 10.0) -> bool:
        """Block until ``predicate(self)`` holds; test and shutdown helper."""
        with self._cond:
            return self._cond.wait_for(lambda: bool(predicate(self)) or self._stopped, timeout)

    @property
    def error(self) -> str | None:
        with self._cond:
            return self._error

    @property
    def report(self) -> RunReport | None:
        with self._cond:
            return self._report
