import random

import pytest

from compass import (
    CalibrationModel,
    CompetenceLabel,
    CompetenceMemory,
    EnvironmentDescriptor,
    FeedbackSource,
    incorporate_feedback,
)
from compass.synth import ClusterSpec, ScenarioSpec

TWO_CLUSTER_SPEC = ScenarioSpec(
    dimension=4,
    noise_radius=0.1,
    clusters=(
        ClusterSpec(
            name="corridor",
            center=(0.0, 0.0, 0.0, 0.0),
            frames=5,
            competence=CompetenceLabel.COMPETENT,
        ),
        ClusterSpec(
            name="lab",
            center=(10.0, 0.0, 0.0, 0.0),
            frames=6,
            competence=CompetenceLabel.INCOMPETENT,
        ),
    ),
    reference_per_cluster=4,
    reference_radius=1.0,
)

TWO_CLUSTER_SPEC_JSON = {
    "dimension": 4,
    "noise_radius": 0.1,
    "clusters": [
        {"name": "corridor", "center": [0, 0, 0, 0], "frames": 5, "competence": "competent"},
        {"name": "lab", "center": [10, 0, 0, 0], "frames": 6, "competence": "incompetent"},
    ],
    "reference": {"per_cluster": 4, "radius": 1.0},
}


def make_descriptor(values, id="d", label=None, image_ref=None):
    return EnvironmentDescriptor(
        id=id, vector=tuple(float(v) for v in values), label=label, image_ref=image_ref
    )


def random_descriptors(rng: random.Random, count: int, dim: int, scale: float = 10.0, prefix="r"):
    return [
        EnvironmentDescriptor(
            id=f"{prefix}{i}", vector=tuple(rng.uniform(-scale, scale) for _ in range(dim))
        )
        for i in range(count)
    ]


def memory_of(calib_dim, *labeled_vectors):
    """Build a memory from (vector, label) pairs in insertion order."""
    memory = CompetenceMemory()
    for i, (values, label) in enumerate(labeled_vectors):
        memory = incorporate_feedback(
            memory,
            make_descriptor(values, id=f"m{i}"),
            CompetenceLabel(label),
            FeedbackSource.HUMAN,
        )
    return memory


@pytest.fixture
def unit_calibration():
    """Kernel width 1 over a nominal 1-D reference."""
    return CalibrationModel(kernel_width=1.0, dimension=1, reference_count=2)


def calibration_for(dim, width=1.0):
    return CalibrationModel(kernel_width=width, dimension=dim, reference_count=2)
