"""Episode replay: assess each frame, ask for feedback when unknown, and
emit a deterministic event log.

Per frame the action is total and exclusive: UNKNOWN verdicts raise
ASK_HUMAN (feedback is requested and appended to memory), known-competent
frames PROCEED, known-incompetent frames FLAG_INCOMPETENT. Event logs from
two identical runs are byte-identical once ``wall_time`` is excluded.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Protocol, Sequence, TextIO

from .assessment import (
    Assessment,
    CompetenceLabel,
    CompetenceMemory,
    FeedbackSource,
    Verdict,
    assess,
    incorporate_feedback,
)
from .errors import FeedbackUnavailable
from .semantics import (
    ExpertAssessment,
    KnowledgeStatement,
    ReferenceAtlas,
    SemanticLexicon,
    assess_expert,
)
from .space import CalibrationModel
from .storage import (
    EpisodeFrame,
    PathLike,
    StoredRun,
    load_embeddings,
    load_episode,
    load_run,
    load_word_vectors,
    save_run,
)

__all__ = [
    "Action",
    "Feedback",
    "AssessmentEvent",
    "RunReport",
    "ExpertContext",
    "RunConfig",
    "FeedbackProvider",
    "OracleFeedback",
    "InteractiveFeedback",
    "replay",
    "run_episode",
    "oracle_feedback",
    "write_report",
    "format_report_table",
]


class Action(enum.Enum):
    ASK_HUMAN = "ASK_HUMAN"
    PROCEED = "PROCEED"
    FLAG_INCOMPETENT = "FLAG_INCOMPETENT"


@dataclass(frozen=True)
class Feedback:
    label: CompetenceLabel
    source: FeedbackSource


@dataclass(frozen=True)
class AssessmentEvent:
    """One frame's decision, with feedback when the engine had to ask."""

    frame_index: int
    p_known: float
    verdict: Verdict
    competence_score: float | None
    action: Action
    feedback: Feedback | None
    expert: ExpertAssessment | None
    wall_time: float

    def to_json_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {
            "frame_index": self.frame_index,
            "p_known": self.p_known,
            "verdict": self.verdict.value,
        }
        if self.competence_score is not None:
            record["competence_score"] = self.competence_score
        record["action"] = self.action.value
        if self.feedback is not None:
            record["feedback"] = {
                "label": self.feedback.label.value,
                "source": self.feedback.source.value,
            }
        if self.expert is not None:
            record["expert"] = {
                "per_statement": [
                    {"statement": str(s.statement), "score": s.score, "witness": s.witness}
                    for s in self.expert.per_statement
                ],
                "p_incompetent": self.expert.p_incompetent,
                "p_competent": self.expert.p_competent,
            }
        record["wall_time"] = self.wall_time
        return record


@dataclass(frozen=True)
class RunReport:
    events: tuple[AssessmentEvent, ...]
    frames_total: int
    ask_count: int
    flag_count: int
    final_memory_size: int

    def summary_dict(self) -> dict[str, int]:
        return {
            "frames_total": self.frames_total,
            "ask_count": self.ask_count,
            "flag_count": self.flag_count,
            "final_memory_size": self.final_memory_size,
        }


@dataclass(frozen=True)
class ExpertContext:
    """Optional prior-knowledge attachment for a replay."""

    atlas: ReferenceAtlas
    statements: tuple[KnowledgeStatement, ...]
    lexicon: SemanticLexicon


class FeedbackProvider(Protocol):
    def __call__(self, frame: EpisodeFrame, assessment: Assessment) -> Feedback: ...


class OracleFeedback:
    """Answers asks from the episode's ground-truth labels, standing in for
    the human of a recorded run."""

    def __call__(self, frame: EpisodeFrame, assessment: Assessment) -> Feedback:
        return Feedback(label=oracle_feedback(frame), source=FeedbackSource.ORACLE)


def oracle_feedback(frame: EpisodeFrame) -> CompetenceLabel:
    """Ground-truth competence of a frame, if it was recorded."""
    if frame.ground_truth_competence is None:
        raise FeedbackUnavailable(
            f"frame {frame.frame_index} carries no ground-truth competence"
        )
    return frame.ground_truth_competence


_ACCEPTED_INPUTS = {
    "c": CompetenceLabel.COMPETENT,
    "competent": CompetenceLabel.COMPETENT,
    "i": CompetenceLabel.INCOMPETENT,
    "incompetent": CompetenceLabel.INCOMPETENT,
}


class InteractiveFeedback:
    """Prompts a terminal operator for a competence judgment."""

    def __init__(self, in_stream: TextIO, out_stream: TextIO) -> None:
        self._in = in_stream
        self._out = out_stream

    def __call__(self, frame: EpisodeFrame, assessment: Assessment) -> Feedback:
        self._out.write(
            f"unknown environment: frame {frame.frame_index} "
            f"(id {frame.descriptor.id}, p_known {assessment.p_known:.4f})\n"
        )
        if frame.descriptor.image_ref is not None:
            self._out.write(f"image: {frame.descriptor.image_ref}\n")
        while True:
            self._out.write("is the agent competent here? [c]ompetent / [i]ncompetent: ")
            self._out.flush()
            line = self._in.readline()
            if line == "":
                raise FeedbackUnavailable("input closed before feedback arrived")
            label = _ACCEPTED_INPUTS.get(line.strip().lower())
            if label is not None:
                return Feedback(label=label, source=FeedbackSource.HUMAN)
            self._out.write(f"unrecognized answer {line.strip()!r}\n")


def replay(
    frames: Sequence[EpisodeFrame],
    calibration: CalibrationModel,
    memory: CompetenceMemory,
    threshold: float,
    provider: FeedbackProvider,
    expert: ExpertContext | None = None,
    on_assess: Callable[[EpisodeFrame, Assessment, ExpertAssessment | None], None] | None = None,
    on_event: Callable[[AssessmentEvent, CompetenceMemory], None] | None = None,
    gate: Callable[[EpisodeFrame], None] | None = None,
) -> tuple[RunReport, CompetenceMemory]:
    """Drive the assess/ask/update loop over an episode.

    ``gate`` is invoked between frames (pacing or manual stepping);
    ``on_assess`` right after a frame is scored; ``on_event`` after its event
    is final. The loop owns the memory: callers observe snapshots only.
    """
    events: list[AssessmentEvent] = []
    ask_count = 0
    flag_count = 0
    for position, frame in enumerate(frames):
        if gate is not None and position > 0:
            gate(frame)
        result = assess(frame.descriptor, memory, calibration, threshold)
        expert_view: ExpertAssessment | None = None
        if expert is not None:
            expert_view = assess_expert(
                frame.descriptor, expert.atlas, expert.statements, expert.lexicon, calibration
            )
        if on_assess is not None:
            on_assess(frame, result, expert_view)

        feedback: Feedback | None = None
        if result.verdict is Verdict.UNKNOWN:
            feedback = provider(frame, result)
            memory = incorporate_feedback(memory, frame.descriptor, feedback.label, feedback.source)
            action = Action.ASK_HUMAN
            ask_count += 1
        elif result.competence_score is not None and result.competence_score < 0:
            action = Action.FLAG_INCOMPETENT
            flag_count += 1
        else:
            action = Action.PROCEED

        event = AssessmentEvent(
            frame_index=frame.frame_index,
            p_known=result.p_known,
            verdict=result.verdict,
            competence_score=result.competence_score,
            action=action,
            feedback=feedback,
            expert=expert_view,
            wall_time=time.time(),
        )
        events.append(event)
        if on_event is not None:
            on_event(event, memory)

    report = RunReport(
        events=tuple(events),
        frames_total=len(frames),
        ask_count=ask_count,
        flag_count=flag_count,
        final_memory_size=len(memory),
    )
    return report, memory


@dataclass
class RunConfig:
    """Everything one replay needs, as resolved from CLI flags."""

    mode: str
    episode_path: PathLike
    calibration_path: PathLike
    run_state_path: PathLike | None = None
    threshold: float = 0.5
    knowledge: tuple[KnowledgeStatement, ...] = ()
    atlas_path: PathLike | None = None
    lexicon_path: PathLike | None = None
    report_path: PathLike | None = None
    port: int = 8000
    pace_ms: int = 500
    manual: bool = False

    def __post_init__(self) -> None:
        if self.mode not in ("interactive", "oracle", "serve"):
            raise ValueError(f"mode must be interactive, oracle, or serve, got {self.mode!r}")
        if self.knowledge and (self.atlas_path is None or self.lexicon_path is None):
            raise ValueError("knowledge statements require both --atlas and --wordvecs")
        if not self.knowledge and (self.atlas_path is not None or self.lexicon_path is not None):
            raise ValueError("--atlas/--wordvecs have no effect without --knowledge")


def load_run_inputs(
    config: RunConfig,
) -> tuple[list[EpisodeFrame], CalibrationModel, CompetenceMemory, ExpertContext | None]:
    """Resolve episode, calibration, memory, and expert context from paths.

    When the state file already exists it wins over the calibration file:
    the persisted document carries both the calibration and the grown memory
    of the earlier pass.
    """
    frames = load_episode(config.episode_path)
    state_path = Path(config.run_state_path) if config.run_state_path is not None else None
    if state_path is not None and state_path.exists():
        stored = load_run(state_path)
    else:
        stored = load_run(config.calibration_path)
    expert: ExpertContext | None = None
    if config.knowledge:
        assert config.atlas_path is not None and config.lexicon_path is not None
        expert = ExpertContext(
            atlas=ReferenceAtlas(environments=tuple(load_embeddings(config.atlas_path))),
            statements=config.knowledge,
            lexicon=load_word_vectors(config.lexicon_path),
        )
    return frames, stored.calibration, stored.memory, expert


def run_episode(config: RunConfig, provider: FeedbackProvider) -> RunReport:
    """Replay an episode per the config: load inputs, loop, persist state,
    and write the report."""
    frames, calibration, memory, expert = load_run_inputs(config)
    report, final_memory = replay(
        frames, calibration, memory, config.threshold, provider, expert=expert
    )
    if config.run_state_path is not None:
        save_run(StoredRun(calibration=calibration, memory=final_memory), config.run_state_path)
    if config.report_path is not None:
        write_report(report, config.report_path)
    return report


def write_report(report: RunReport, path: PathLike) -> None:
    """Write the event log as JSON Lines with a trailing summary object."""
    with open(path, "w", encoding="utf-8") as handle:
        for event in report.events:
            handle.write(json.dumps(event.to_json_dict(), separators=(",", ":")))
            handle.write("\n")
        handle.write(json.dumps({"summary": report.summary_dict()}, separators=(",", ":")))
        handle.write("\n")


def format_report_table(report: RunReport) -> str:
    """Human-readable per-frame table plus the summary line."""
    lines = [f"{'frame':>6}  {'p_known':>8}  {'verdict':<8} {'action':<17} {'score':>8}  feedback"]
    for event in report.events:
        score = f"{event.competence_score:+.4f}" if event.competence_score is not None else "-"
        feedback = (
            f"{event.feedback.label.value} ({event.feedback.source.value})"
            if event.feedback is not None
            else ""
        )
        lines.append(
            f"{event.frame_index:>6}  {event.p_known:>8.4f}  {event.verdict.value:<8} "
            f"{event.action.value:<17} {score:>8}  {feedback}"
        )
    s = report.summary_dict()
    lines.append(
        f"frames: {s['frames_total']}  asks: {s['ask_count']}  flags: {s['flag_count']}  "
        f"memory: {s['final_memory_size']}"
    )
    return "\n".join(lines)
