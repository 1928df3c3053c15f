"""Competence assessment against a memory of human-labeled environments.

The engine keeps an ordered memory of descriptors the human (or a ground-truth
oracle) has labeled competent/incompetent. A query is scored by the Gaussian
kernel of its distance to the nearest memory entry; above the decision
threshold the environment counts as known and inherits a signed competence
score from that entry's label.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DimensionMismatch, InvalidThreshold
from .space import CalibrationModel, EnvironmentDescriptor, distance, kernel

__all__ = [
    "CompetenceLabel",
    "FeedbackSource",
    "Verdict",
    "MemoryEntry",
    "CompetenceMemory",
    "NearestEntry",
    "Assessment",
    "p_known",
    "assess",
    "incorporate_feedback",
]


class CompetenceLabel(enum.Enum):
    COMPETENT = "competent"
    INCOMPETENT = "incompetent"

    @classmethod
    def parse(cls, text: str) -> "CompetenceLabel":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"competence label must be 'competent' or 'incompetent', got {text!r}") from None

    @property
    def sign(self) -> int:
        return 1 if self is CompetenceLabel.COMPETENT else -1


class FeedbackSource(enum.Enum):
    HUMAN = "human"
    ORACLE = "oracle"


class Verdict(enum.Enum):
    KNOWN = "known"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class MemoryEntry:
    """One labeled environment: descriptor, competence label, and provenance."""

    descriptor: EnvironmentDescriptor
    label: CompetenceLabel
    source: FeedbackSource
    sequence: int

    def __post_init__(self) -> None:
        if self.sequence < 0:
            raise ValueError("sequence must be a non-negative integer")


@dataclass(frozen=True)
class CompetenceMemory:
    """Ordered, append-only collection of labeled environments.

    A value type: :func:`incorporate_feedback` returns a new memory and never
    mutates the old one, so snapshots can be read concurrently while a single
    writer advances the latest version.
    """

    entries: tuple[MemoryEntry, ...] = ()

    def __post_init__(self) -> None:
        dim: int | None = None
        prev_seq = -1
        for entry in self.entries:
            if dim is None:
                dim = entry.descriptor.dimension
            elif entry.descriptor.dimension != dim:
                raise ValueError(
                    f"memory entry {entry.descriptor.id!r} has dimension "
                    f"{entry.descriptor.dimension}, expected {dim}"
                )
            if entry.sequence <= prev_seq:
                raise ValueError("memory sequence numbers must be strictly increasing")
            prev_seq = entry.sequence

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def dimension(self) -> int | None:
        """Vector dimension, fixed by the first insertion; None while empty."""
        return self.entries[0].descriptor.dimension if self.entries else None

    @property
    def next_sequence(self) -> int:
        return self.entries[-1].sequence + 1 if self.entries else 0


@dataclass(frozen=True)
class NearestEntry:
    """Reference to the memory entry nearest to a query."""

    sequence: int
    distance: float


@dataclass(frozen=True)
class Assessment:
    """Outcome of one known/unknown decision.

    ``competence_score`` is present only when the verdict is KNOWN: its
    magnitude is ``p_known`` and its sign follows the nearest entry's label
    (+ competent, - incompetent). When the verdict is UNKNOWN the engine has
    no opinion, which is deliberately distinct from a neutral score of 0.
    """

    p_known: float
    threshold: float
    verdict: Verdict
    competence_score: float | None = None
    nearest: NearestEntry | None = None


def _check_dimensions(query: EnvironmentDescriptor, memory: CompetenceMemory, calib: CalibrationModel) -> None:
    if query.dimension != calib.dimension:
        raise DimensionMismatch(
            f"query dimension {query.dimension} does not match calibration dimension {calib.dimension}"
        )
    if memory.dimension is not None and query.dimension != memory.dimension:
        raise DimensionMismatch(
            f"query dimension {query.dimension} does not match memory dimension {memory.dimension}"
        )


def _nearest_entry(query: EnvironmentDescriptor, memory: CompetenceMemory) -> tuple[MemoryEntry, float] | None:
    """Nearest memory entry by distance; equidistant entries resolve to the
    lowest insertion sequence (entries are stored in sequence order)."""
    best: tuple[MemoryEntry, float] | None = None
    for entry in memory.entries:
        d = distance(query, entry.descriptor)
        if best is None or d < best[1]:
            best = (entry, d)
    return best


def p_known(query: EnvironmentDescriptor, memory: CompetenceMemory, calib: CalibrationModel) -> float:
    """Probability that the query environment resembles a remembered one.

    Zero for an empty memory; otherwise the Gaussian kernel of the distance
    to the nearest entry at the calibrated width.
    """
    _check_dimensions(query, memory, calib)
    nearest = _nearest_entry(query, memory)
    if nearest is None:
        return 0.0
    return kernel(nearest[1], calib.kernel_width)


def assess(
    query: EnvironmentDescriptor,
    memory: CompetenceMemory,
    calib: CalibrationModel,
    threshold: float = 0.5,
) -> Assessment:
    """Decide whether the query environment is known and, if so, how
    competent the agent is there."""
    if not (math.isfinite(threshold) and 0.0 < threshold < 1.0):
        raise InvalidThreshold(f"threshold must lie strictly between 0 and 1, got {threshold!r}")
    _check_dimensions(query, memory, calib)

    nearest = _nearest_entry(query, memory)
    if nearest is None:
        return Assessment(p_known=0.0, threshold=threshold, verdict=Verdict.UNKNOWN)

    entry, d = nearest
    p = kernel(d, calib.kernel_width)
    ref = NearestEntry(sequence=entry.sequence, distance=d)
    if p >= threshold:
        return Assessment(
            p_known=p,
            threshold=threshold,
            verdict=Verdict.KNOWN,
            competence_score=entry.label.sign * p,
            nearest=ref,
        )
    return Assessment(p_known=p, threshold=threshold, verdict=Verdict.UNKNOWN, nearest=ref)


def incorporate_feedback(
    memory: CompetenceMemory,
    query: EnvironmentDescriptor,
    label: CompetenceLabel,
    source: FeedbackSource = FeedbackSource.HUMAN,
) -> CompetenceMemory:
    """Append one labeled environment, returning the grown memory."""
    if memory.dimension is not None and query.dimension != memory.dimension:
        raise DimensionMismatch(
            f"descriptor dimension {query.dimension} does not match memory dimension {memory.dimension}"
        )
    entry = MemoryEntry(descriptor=query, label=label, source=source, sequence=memory.next_sequence)
    return CompetenceMemory(entries=memory.entries + (entry,))
