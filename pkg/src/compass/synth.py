"""Deterministic synthetic scenarios: clustered episodes plus a matching
calibration reference collection.

A scenario file is a JSON object:

    {
      "dimension": 4,
      "noise_radius": 0.1,
      "clusters": [
        {"name": "corridor", "center": [0,0,0,0], "frames": 5, "competence": "competent"},
        {"name": "lab",      "center": [10,0,0,0], "frames": 6, "competence": "incompetent"}
      ],
      "reference": {"per_cluster": 4, "radius": 1.0}
    }

Frames are the cluster center plus noise drawn uniformly from the Euclidean
ball of ``noise_radius``, visited cluster by cluster in file order; every
frame carries its cluster's competence as ground truth. The reference
collection is drawn the same way around each center with the reference
radius, so calibrating on it puts the "known" horizon between the intra- and
inter-cluster scales.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Any

from .assessment import CompetenceLabel
from .errors import InvalidSpec
from .space import EnvironmentDescriptor
from .storage import EpisodeFrame, PathLike

__all__ = ["ClusterSpec", "ScenarioSpec", "generate_synthetic_episode"]


@dataclass(frozen=True)
class ClusterSpec:
    name: str
    center: tuple[float, ...]
    frames: int
    competence: CompetenceLabel


@dataclass(frozen=True)
class ScenarioSpec:
    dimension: int
    noise_radius: float
    clusters: tuple[ClusterSpec, ...]
    reference_per_cluster: int
    reference_radius: float

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InvalidSpec("dimension must be a positive integer")
        if not (math.isfinite(self.noise_radius) and self.noise_radius >= 0):
            raise InvalidSpec("noise_radius must be a finite non-negative real")
        if not self.clusters:
            raise InvalidSpec("at least one cluster is required")
        names = set()
        for cluster in self.clusters:
            if not cluster.name:
                raise InvalidSpec("cluster name must be non-empty")
            if cluster.name in names:
                raise InvalidSpec(f"cluster name {cluster.name!r} is not unique")
            names.add(cluster.name)
            if len(cluster.center) != self.dimension:
                raise InvalidSpec(
                    f"cluster {cluster.name!r} center has {len(cluster.center)} coordinates, "
                    f"expected {self.dimension}"
                )
            if cluster.frames < 1:
                raise InvalidSpec(f"cluster {cluster.name!r} must contribute at least one frame")
        if self.reference_per_cluster < 1:
            raise InvalidSpec("reference.per_cluster must be at least 1")
        if not (math.isfinite(self.reference_radius) and self.reference_radius >= 0):
            raise InvalidSpec("reference.radius must be a finite non-negative real")

    @classmethod
    def from_dict(cls, obj: Any) -> "ScenarioSpec":
        if not isinstance(obj, dict):
            raise InvalidSpec("scenario spec must be a JSON object")
        try:
            dimension = int(obj["dimension"])
            noise_radius = float(obj["noise_radius"])
            raw_clusters = obj["clusters"]
            reference = obj.get("reference", {})
            clusters = tuple(
                ClusterSpec(
                    name=str(c["name"]),
                    center=tuple(float(x) for x in c["center"]),
                    frames=int(c["frames"]),
                    competence=CompetenceLabel.parse(str(c["competence"])),
                )
                for c in raw_clusters
            )
            return cls(
                dimension=dimension,
                noise_radius=noise_radius,
                clusters=clusters,
                reference_per_cluster=int(reference.get("per_cluster", 4)),
                reference_radius=float(reference.get("radius", 1.0)),
            )
        except InvalidSpec:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpec(f"invalid scenario spec: {exc}") from None

    @classmethod
    def from_json_file(cls, path: PathLike) -> "ScenarioSpec":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                obj = json.load(handle)
            except json.JSONDecodeError as exc:
                raise InvalidSpec(f"invalid JSON: {exc.msg}", path=path) from None
        return cls.from_dict(obj)


def _uniform_ball(rng: random.Random, dimension: int, radius: float) -> list[float]:
    """Point drawn uniformly from the Euclidean ball of the given radius."""
    if radius == 0.0:
        return [0.0] * dimension
    while True:
        direction = [rng.gauss(0.0, 1.0) for _ in range(dimension)]
        norm = math.sqrt(sum(x * x for x in direction))
        if norm > 0.0:
            break
    scale = radius * rng.random() ** (1.0 / dimension) / norm
    return [x * scale for x in direction]


def generate_synthetic_episode(
    spec: ScenarioSpec, seed: int
) -> tuple[list[EpisodeFrame], list[EnvironmentDescriptor]]:
    """Generate the episode frames and the calibration reference collection.

    Deterministic for a fixed (spec, seed): the single seeded generator draws
    all frame noise first, then all reference noise, in cluster order.
    """
    rng = random.Random(seed)
    frames: list[EpisodeFrame] = []
    frame_index = 0
    for cluster in spec.clusters:
        for i in range(cluster.frames):
            noise = _uniform_ball(rng, spec.dimension, spec.noise_radius)
            vector = tuple(c + n for c, n in zip(cluster.center, noise))
            frames.append(
                EpisodeFrame(
                    frame_index=frame_index,
                    descriptor=EnvironmentDescriptor(
                        id=f"{cluster.name}-{i:03d}", vector=vector, label=cluster.name
                    ),
                    ground_truth_competence=cluster.competence,
                )
            )
            frame_index += 1

    reference: list[EnvironmentDescriptor] = []
    for cluster in spec.clusters:
        for i in range(spec.reference_per_cluster):
            noise = _uniform_ball(rng, spec.dimension, spec.reference_radius)
            vector = tuple(c + n for c, n in zip(cluster.center, noise))
            reference.append(
                EnvironmentDescriptor(
                    id=f"ref-{cluster.name}-{i:03d}", vector=vector, label=cluster.name
                )
            )
    return frames, reference
