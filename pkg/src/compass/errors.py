"""Exception hierarchy shared by every compass module.

Loader errors carry an optional source path and 1-based line number so the
CLI can report exactly which record was rejected.
"""

from __future__ import annotations

import os


class EngineError(Exception):
    """Base class for all compass errors."""

    def __init__(
        self,
        message: str,
        *,
        path: str | os.PathLike[str] | None = None,
        line: int | None = None,
    ) -> None:
        self.path = str(path) if path is not None else None
        self.line = line
        if self.path is not None and line is not None:
            message = f"{self.path}:{line}: {message}"
        elif self.path is not None:
            message = f"{self.path}: {message}"
        super().__init__(message)


class DimensionMismatch(EngineError):
    """Two vectors (or a vector and a collection) disagree on dimension."""


class InvalidKernelWidth(EngineError):
    """Kernel width must be a positive finite real."""


class InsufficientReference(EngineError):
    """Calibration needs at least two reference descriptors."""


class DegenerateReference(EngineError):
    """Reference set cannot satisfy the mean-kernel constraint for any width."""


class InvalidThreshold(EngineError):
    """Decision threshold must lie strictly between 0 and 1."""


class AllTokensOutOfVocabulary(EngineError):
    """No token of the phrase resolves against the lexicon."""


class ZeroVector(EngineError):
    """A phrase embedding collapsed to zero norm."""


class EmptyAtlas(EngineError):
    """The reference atlas holds no environments."""


class EmptyLexicon(EngineError):
    """The word-vector file yielded no usable entries."""


class MalformedRecord(EngineError):
    """A record in an input file could not be parsed."""


class DuplicateId(EngineError):
    """Two records in one collection share an id."""


class NonFiniteValue(EngineError):
    """A vector coordinate parsed to NaN or infinity."""


class NonMonotoneFrameIndex(EngineError):
    """Episode frame indices must be strictly increasing."""


class UnsupportedVersion(EngineError):
    """Persisted document carries a format_version this build cannot read."""


class MalformedDocument(EngineError):
    """A persisted run/calibration document is structurally invalid."""


class FeedbackUnavailable(EngineError):
    """The feedback provider cannot produce a competence label."""


class InvalidSpec(EngineError):
    """A synthetic-scenario spec file is invalid."""
