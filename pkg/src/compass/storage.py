"""Loading and persistence for every external data artifact.

Formats:

* Embedding collections and episodes are JSON Lines, one object per line.
  Embedding records carry ``id``, ``vector``, and optionally ``label`` and
  ``image_ref``; episode records add ``frame_index`` and optionally
  ``ground_truth_competence``.
* Word vectors use the word2vec text convention: an optional ``count dim``
  header line followed by ``token x1 .. xd`` rows. Later duplicate tokens
  overwrite earlier ones.
* Run state (calibration + memory) is a single versioned JSON document.

Loaders reject rather than repair: the first malformed line aborts the load
with its 1-based line number. Floats round-trip exactly through their decimal
representation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from typing import Any, Iterable

from .assessment import (
    CompetenceLabel,
    CompetenceMemory,
    FeedbackSource,
    MemoryEntry,
)
from .errors import (
    DimensionMismatch,
    DuplicateId,
    EmptyLexicon,
    MalformedDocument,
    MalformedRecord,
    NonFiniteValue,
    NonMonotoneFrameIndex,
    UnsupportedVersion,
)
from .semantics import SemanticLexicon
from .space import CalibrationModel, EnvironmentDescriptor

__all__ = [
    "FORMAT_VERSION",
    "EpisodeFrame",
    "StoredRun",
    "load_embeddings",
    "save_embeddings",
    "load_episode",
    "save_episode",
    "load_word_vectors",
    "save_word_vectors",
    "load_run",
    "save_run",
]

FORMAT_VERSION = 1

PathLike = str | os.PathLike[str]


@dataclass(frozen=True)
class EpisodeFrame:
    """One camera moment of a drive: a descriptor plus its position in the
    episode and, for oracle replays, the ground-truth competence there."""

    frame_index: int
    descriptor: EnvironmentDescriptor
    ground_truth_competence: CompetenceLabel | None = None

    def __post_init__(self) -> None:
        if self.frame_index < 0:
            raise ValueError("frame_index must be a non-negative integer")


@dataclass(frozen=True)
class StoredRun:
    """Persistable engine state: the calibration plus the labeled memory."""

    calibration: CalibrationModel
    memory: CompetenceMemory
    format_version: int = FORMAT_VERSION

    def __post_init__(self) -> None:
        if self.memory.dimension is not None and self.memory.dimension != self.calibration.dimension:
            raise ValueError(
                f"memory dimension {self.memory.dimension} does not match "
                f"calibration dimension {self.calibration.dimension}"
            )


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _parse_vector(raw: Any, *, path: PathLike, line: int) -> tuple[float, ...]:
    if not isinstance(raw, list) or not raw:
        raise MalformedRecord("'vector' must be a non-empty array of numbers", path=path, line=line)
    coords = []
    for x in raw:
        if not _is_number(x):
            raise MalformedRecord(f"vector element {x!r} is not a number", path=path, line=line)
        x = float(x)
        if not math.isfinite(x):
            raise NonFiniteValue(f"vector contains non-finite value {x!r}", path=path, line=line)
        coords.append(x)
    return tuple(coords)


def _parse_record_object(text: str, *, path: PathLike, line: int) -> dict[str, Any]:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedRecord(f"invalid JSON: {exc.msg}", path=path, line=line) from None
    if not isinstance(obj, dict):
        raise MalformedRecord("record must be a JSON object", path=path, line=line)
    return obj


def _parse_descriptor(
    obj: dict[str, Any], *, path: PathLike, line: int, expected_dim: int | None
) -> EnvironmentDescriptor:
    record_id = obj.get("id")
    if not isinstance(record_id, str) or not record_id:
        raise MalformedRecord("'id' must be a non-empty string", path=path, line=line)
    vector = _parse_vector(obj.get("vector"), path=path, line=line)
    if expected_dim is not None and len(vector) != expected_dim:
        raise DimensionMismatch(
            f"vector has {len(vector)} coordinates, expected {expected_dim}", path=path, line=line
        )
    label = obj.get("label")
    if label is not None and not isinstance(label, str):
        raise MalformedRecord("'label' must be a string when present", path=path, line=line)
    image_ref = obj.get("image_ref")
    if image_ref is not None and not isinstance(image_ref, str):
        raise MalformedRecord("'image_ref' must be a string when present", path=path, line=line)
    return EnvironmentDescriptor(id=record_id, vector=vector, label=label, image_ref=image_ref)


def load_embeddings(path: PathLike) -> list[EnvironmentDescriptor]:
    """Load a JSON Lines embedding collection, validating uniform dimensions
    and unique ids."""
    descriptors: list[EnvironmentDescriptor] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line, text in enumerate(handle, start=1):
            obj = _parse_record_object(text, path=path, line=line)
            expected = descriptors[0].dimension if descriptors else None
            descriptor = _parse_descriptor(obj, path=path, line=line, expected_dim=expected)
            if descriptor.id in seen:
                raise DuplicateId(f"id {descriptor.id!r} already seen", path=path, line=line)
            seen.add(descriptor.id)
            descriptors.append(descriptor)
    return descriptors


def _descriptor_fields(descriptor: EnvironmentDescriptor) -> dict[str, Any]:
    fields: dict[str, Any] = {"id": descriptor.id, "vector": list(descriptor.vector)}
    if descriptor.label is not None:
        fields["label"] = descriptor.label
    if descriptor.image_ref is not None:
        fields["image_ref"] = descriptor.image_ref
    return fields


def save_embeddings(descriptors: Iterable[EnvironmentDescriptor], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for descriptor in descriptors:
            handle.write(json.dumps(_descriptor_fields(descriptor), separators=(",", ":")))
            handle.write("\n")


def load_episode(path: PathLike) -> list[EpisodeFrame]:
    """Load a JSON Lines episode, enforcing strictly increasing frame
    indices and uniform descriptor dimensions."""
    frames: list[EpisodeFrame] = []
    prev_index = -1
    with open(path, "r", encoding="utf-8") as handle:
        for line, text in enumerate(handle, start=1):
            obj = _parse_record_object(text, path=path, line=line)
            raw_index = obj.get("frame_index")
            if not isinstance(raw_index, int) or isinstance(raw_index, bool) or raw_index < 0:
                raise MalformedRecord(
                    "'frame_index' must be a non-negative integer", path=path, line=line
                )
            if raw_index <= prev_index:
                raise NonMonotoneFrameIndex(
                    f"frame_index {raw_index} does not increase past {prev_index}",
                    path=path,
                    line=line,
                )
            expected = frames[0].descriptor.dimension if frames else None
            descriptor = _parse_descriptor(obj, path=path, line=line, expected_dim=expected)
            truth_raw = obj.get("ground_truth_competence")
            truth: CompetenceLabel | None = None
            if truth_raw is not None:
                try:
                    truth = CompetenceLabel.parse(truth_raw if isinstance(truth_raw, str) else "")
                except ValueError:
                    raise MalformedRecord(
                        f"'ground_truth_competence' must be 'competent' or 'incompetent', "
                        f"got {truth_raw!r}",
                        path=path,
                        line=line,
                    ) from None
            frames.append(
                EpisodeFrame(frame_index=raw_index, descriptor=descriptor, ground_truth_competence=truth)
            )
            prev_index = raw_index
    return frames


def save_episode(frames: Iterable[EpisodeFrame], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for frame in frames:
            record: dict[str, Any] = {"frame_index": frame.frame_index}
            record.update(_descriptor_fields(frame.descriptor))
            if frame.ground_truth_competence is not None:
                record["ground_truth_competence"] = frame.ground_truth_competence.value
            handle.write(json.dumps(record, separators=(",", ":")))
            handle.write("\n")


def _looks_like_header(tokens: list[str]) -> bool:
    return len(tokens) == 2 and all(t.isdigit() for t in tokens)


def load_word_vectors(path: PathLike) -> SemanticLexicon:
    """Load a word2vec-text lexicon. A leading ``count dim`` header line is
    detected and skipped; tokens are lowercased; later duplicates overwrite
    earlier entries."""
    vectors: dict[str, tuple[float, ...]] = {}
    dimension: int | None = None
    with open(path, "r", encoding="utf-8") as handle:
        for line, text in enumerate(handle, start=1):
            tokens = text.split()
            if not tokens:
                raise MalformedRecord("blank line in word-vector file", path=path, line=line)
            if line == 1 and _looks_like_header(tokens):
                continue
            token, raw_coords = tokens[0].lower(), tokens[1:]
            if not raw_coords:
                raise MalformedRecord(f"token {token!r} has no coordinates", path=path, line=line)
            if dimension is None:
                dimension = len(raw_coords)
            elif len(raw_coords) != dimension:
                raise DimensionMismatch(
                    f"token {token!r} has {len(raw_coords)} coordinates, expected {dimension}",
                    path=path,
                    line=line,
                )
            coords = []
            norm_sq = 0.0
            for raw in raw_coords:
                try:
                    x = float(raw)
                except ValueError:
                    raise MalformedRecord(
                        f"coordinate {raw!r} is not a decimal number", path=path, line=line
                    ) from None
                if not math.isfinite(x):
                    raise MalformedRecord(
                        f"coordinate {raw!r} is not finite", path=path, line=line
                    )
                coords.append(x)
                norm_sq += x * x
            if norm_sq == 0.0:
                raise MalformedRecord(f"token {token!r} has a zero-norm vector", path=path, line=line)
            vectors[token] = tuple(coords)
    if not vectors:
        raise EmptyLexicon("word-vector file holds no entries", path=path)
    return SemanticLexicon(vectors=vectors)


def save_word_vectors(lexicon: SemanticLexicon, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        dim = lexicon.dimension or 0
        handle.write(f"{len(lexicon)} {dim}\n")
        for token, vec in lexicon.vectors.items():
            handle.write(token + " " + " ".join(repr(x) for x in vec) + "\n")


def _memory_entry_fields(entry: MemoryEntry) -> dict[str, Any]:
    fields: dict[str, Any] = {
        "id": entry.descriptor.id,
        "vector": list(entry.descriptor.vector),
        "label": entry.label.value,
        "source": entry.source.value,
        "sequence": entry.sequence,
    }
    # Descriptor display metadata rides along so a round trip loses nothing.
    if entry.descriptor.label is not None:
        fields["scene_label"] = entry.descriptor.label
    if entry.descriptor.image_ref is not None:
        fields["image_ref"] = entry.descriptor.image_ref
    return fields


def save_run(run: StoredRun, path: PathLike) -> None:
    """Write a run document (calibration + memory) as versioned JSON."""
    document = {
        "format_version": run.format_version,
        "calibration": {
            "kernel_width": run.calibration.kernel_width,
            "dimension": run.calibration.dimension,
            "reference_count": run.calibration.reference_count,
            "mean_target": run.calibration.mean_target,
            "solver_tolerance": run.calibration.solver_tolerance,
            "provenance": dict(run.calibration.provenance),
        },
        "memory": {
            "dimension": run.memory.dimension if run.memory.dimension is not None else run.calibration.dimension,
            "entries": [_memory_entry_fields(entry) for entry in run.memory.entries],
        },
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
        handle.write("\n")


def _document_number(obj: dict[str, Any], key: str, *, path: PathLike) -> float:
    value = obj.get(key)
    if not _is_number(value):
        raise MalformedDocument(f"'{key}' must be a number", path=path)
    return float(value)


def _document_int(obj: dict[str, Any], key: str, *, path: PathLike) -> int:
    value = obj.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise MalformedDocument(f"'{key}' must be an integer", path=path)
    return value


def load_run(path: PathLike) -> StoredRun:
    """Load a run document saved by :func:`save_run`."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise MalformedDocument(f"invalid JSON: {exc.msg}", path=path) from None
    if not isinstance(document, dict):
        raise MalformedDocument("document must be a JSON object", path=path)

    version = document.get("format_version")
    if not isinstance(version, int) or isinstance(version, bool):
        raise MalformedDocument("'format_version' must be an integer", path=path)
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(
            f"format_version {version} is not supported (expected {FORMAT_VERSION})", path=path
        )

    calib_obj = document.get("calibration")
    if not isinstance(calib_obj, dict):
        raise MalformedDocument("'calibration' must be an object", path=path)
    provenance = calib_obj.get("provenance", {})
    if not isinstance(provenance, dict):
        raise MalformedDocument("'calibration.provenance' must be an object", path=path)
    try:
        calibration = CalibrationModel(
            kernel_width=_document_number(calib_obj, "kernel_width", path=path),
            dimension=_document_int(calib_obj, "dimension", path=path),
            reference_count=_document_int(calib_obj, "reference_count", path=path),
            mean_target=_document_number(calib_obj, "mean_target", path=path),
            solver_tolerance=_document_number(calib_obj, "solver_tolerance", path=path),
            provenance=provenance,
        )
    except ValueError as exc:
        raise MalformedDocument(f"invalid calibration: {exc}", path=path) from None

    memory_obj = document.get("memory")
    if not isinstance(memory_obj, dict):
        raise MalformedDocument("'memory' must be an object", path=path)
    raw_entries = memory_obj.get("entries")
    if not isinstance(raw_entries, list):
        raise MalformedDocument("'memory.entries' must be an array", path=path)
    entries: list[MemoryEntry] = []
    for position, raw in enumerate(raw_entries):
        if not isinstance(raw, dict):
            raise MalformedDocument(f"memory entry {position} must be an object", path=path)
        try:
            descriptor = EnvironmentDescriptor(
                id=raw.get("id", ""),
                vector=tuple(raw.get("vector", ())),
                label=raw.get("scene_label"),
                image_ref=raw.get("image_ref"),
            )
            entry = MemoryEntry(
                descriptor=descriptor,
                label=CompetenceLabel.parse(str(raw.get("label"))),
                source=FeedbackSource(raw.get("source")),
                sequence=_document_int(raw, "sequence", path=path),
            )
        except (ValueError, TypeError) as exc:
            raise MalformedDocument(f"invalid memory entry {position}: {exc}", path=path) from None
        entries.append(entry)
    try:
        memory = CompetenceMemory(entries=tuple(entries))
        return StoredRun(calibration=calibration, memory=memory, format_version=version)
    except ValueError as exc:
        raise MalformedDocument(str(exc), path=path) from None
