"""Distance, kernel, and calibration math over embedding vectors.

Everything here is a pure function over immutable inputs. Vectors are plain
tuples of floats and all arithmetic goes through the math stdlib, so results
are bit-for-bit reproducible across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .errors import (
    DegenerateReference,
    DimensionMismatch,
    InsufficientReference,
    InvalidKernelWidth,
)

__all__ = [
    "EnvironmentDescriptor",
    "CalibrationModel",
    "distance",
    "nearest_neighbor",
    "kernel",
    "nn_distances",
    "mean_kernel",
    "calibrate",
]


@dataclass(frozen=True)
class EnvironmentDescriptor:
    """One observed environment: an embedding vector plus display metadata.

    The vector is produced by an external feature extractor and consumed
    as-is; ``image_ref`` is an opaque path handed to the service layer and
    never decoded here.
    """

    id: str
    vector: tuple[float, ...]
    label: str | None = None
    image_ref: str | None = None

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("descriptor id must be a non-empty string")
        coords = tuple(float(x) for x in self.vector)
        if len(coords) < 1:
            raise ValueError(f"descriptor {self.id!r}: vector must have at least one coordinate")
        for x in coords:
            if not math.isfinite(x):
                raise ValueError(f"descriptor {self.id!r}: vector contains a non-finite coordinate")
        object.__setattr__(self, "vector", coords)

    @property
    def dimension(self) -> int:
        return len(self.vector)


@dataclass(frozen=True)
class CalibrationModel:
    """Calibrated kernel width plus the evidence it was solved under.

    ``kernel_width`` is the Gaussian scale at which the mean nearest-neighbor
    kernel value over the reference collection equals ``mean_target`` (within
    ``solver_tolerance``).
    """

    kernel_width: float
    dimension: int
    reference_count: int
    mean_target: float = 0.5
    solver_tolerance: float = 1e-9
    provenance: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kernel_width) and self.kernel_width > 0):
            raise ValueError("kernel_width must be a positive finite real")
        if self.dimension < 1:
            raise ValueError("dimension must be a positive integer")
        if self.reference_count < 2:
            raise ValueError("reference_count must be at least 2")
        if not (0.0 < self.mean_target < 1.0):
            raise ValueError("mean_target must lie in (0, 1)")
        if not (math.isfinite(self.solver_tolerance) and self.solver_tolerance > 0):
            raise ValueError("solver_tolerance must be a positive finite real")


def distance(a: EnvironmentDescriptor, b: EnvironmentDescriptor) -> float:
    """Euclidean (L2) distance between two descriptors."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(
            f"descriptor {a.id!r} has dimension {a.dimension} but {b.id!r} has {b.dimension}"
        )
    return math.dist(a.vector, b.vector)


def nearest_neighbor(
    query: EnvironmentDescriptor,
    collection: Sequence[EnvironmentDescriptor],
    exclude_id: str | None = None,
) -> tuple[int, float] | None:
    """Index and distance of the entry closest to ``query``.

    Entries whose id equals ``exclude_id`` are skipped. Returns ``None`` when
    no candidate remains. Ties go to the lowest index so scans are
    deterministic.
    """
    best: tuple[int, float] | None = None
    for index, entry in enumerate(collection):
        if exclude_id is not None and entry.id == exclude_id:
            continue
        d = distance(query, entry)
        if best is None or d < best[1]:
            best = (index, d)
    return best


def kernel(d: float, width: float) -> float:
    """Gaussian kernel exp(-d^2 / width^2) mapping a distance into (0, 1]."""
    if not (math.isfinite(width) and width > 0):
        raise InvalidKernelWidth(f"kernel width must be positive and finite, got {width!r}")
    if not (math.isfinite(d) and d >= 0):
        raise ValueError(f"distance must be a finite non-negative real, got {d!r}")
    return math.exp(-((d / width) ** 2))


def nn_distances(reference: Sequence[EnvironmentDescriptor]) -> list[float]:
    """Per-entry distance to its nearest other entry.

    Self-exclusion is positional: entry i is removed from its own candidate
    set, so duplicate ids (or duplicate vectors) keep their plain meaning.
    """
    n = len(reference)
    if n < 2:
        raise InsufficientReference(f"need at least 2 reference descriptors, got {n}")
    out: list[float] = []
    for i, entry in enumerate(reference):
        best = math.inf
        for j, other in enumerate(reference):
            if j == i:
                continue
            d = distance(entry, other)
            if d < best:
                best = d
        out.append(best)
    return out


def mean_kernel(distances: Sequence[float], width: float) -> float:
    """Mean Gaussian kernel value of ``distances`` at the given width."""
    return sum(kernel(d, width) for d in distances) / len(distances)


# Bisection bracket seeds relative to the largest nearest-neighbor distance.
_BRACKET_LO_FACTOR = 1e-9
_BRACKET_HI_FACTOR = 10.0
_MAX_BRACKET_STEPS = 2000
_MAX_BISECTIONS = 200


def calibrate(
    reference: Sequence[EnvironmentDescriptor],
    mean_target: float = 0.5,
    tolerance: float = 1e-9,
    provenance: Mapping[str, Any] | None = None,
) -> CalibrationModel:
    """Solve for the kernel width at which the reference collection's mean
    nearest-neighbor kernel value equals ``mean_target``.

    The mean is continuous and strictly increasing in the width whenever some
    nearest-neighbor distance is positive, so bisection on a bracketing
    interval finds the unique root. The bracket starts at
    [1e-9 * max_d, 10 * max_d] and is widened by doubling / halving until it
    straddles the target.
    """
    if not (0.0 < mean_target < 1.0):
        raise ValueError("mean_target must lie in (0, 1)")
    if not (math.isfinite(tolerance) and tolerance > 0):
        raise ValueError("tolerance must be a positive finite real")

    ds = nn_distances(reference)
    n = len(ds)
    zero_fraction = sum(1 for d in ds if d == 0.0) / n
    if all(d == 0.0 for d in ds):
        raise DegenerateReference("every reference entry has a zero-distance nearest neighbor")
    if zero_fraction >= mean_target:
        raise DegenerateReference(
            f"{zero_fraction:.3f} of reference entries sit at distance 0; the mean kernel "
            f"value cannot drop to {mean_target} for any width"
        )

    max_d = max(ds)
    lo = _BRACKET_LO_FACTOR * max_d
    hi = _BRACKET_HI_FACTOR * max_d
    steps = 0
    while mean_kernel(ds, lo) >= mean_target:
        lo *= 0.5
        steps += 1
        if steps > _MAX_BRACKET_STEPS or lo == 0.0:
            raise DegenerateReference("could not bracket the calibration target from below")
    steps = 0
    while mean_kernel(ds, hi) < mean_target:
        hi *= 2.0
        steps += 1
        if steps > _MAX_BRACKET_STEPS or not math.isfinite(hi):
            raise DegenerateReference("could not bracket the calibration target from above")

    best_s = hi
    best_err = abs(mean_kernel(ds, hi) - mean_target)
    for _ in range(_MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g = mean_kernel(ds, mid)
        err = abs(g - mean_target)
        if err < best_err:
            best_s, best_err = mid, err
        if g < mean_target:
            lo = mid
        else:
            hi = mid

    if best_err > tolerance:
        raise DegenerateReference(
            f"bisection stalled {best_err:.3e} away from the target (tolerance {tolerance:.3e})"
        )
    return CalibrationModel(
        kernel_width=best_s,
        dimension=reference[0].dimension,
        reference_count=n,
        mean_target=mean_target,
        solver_tolerance=tolerance,
        provenance=dict(provenance or {}),
    )
