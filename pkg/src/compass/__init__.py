"""compass: online competence assessment for mobile agents.

Decides whether the current environment (an embedding vector) resembles one
seen before, asks a human for a competence judgment when it does not, and
scores prior semantic knowledge statements against a labeled atlas.
"""

from .assessment import (
    Assessment,
    CompetenceLabel,
    CompetenceMemory,
    FeedbackSource,
    MemoryEntry,
    Verdict,
    assess,
    incorporate_feedback,
    p_known,
)
from .semantics import (
    ExpertAssessment,
    KnowledgeStatement,
    ReferenceAtlas,
    SemanticLexicon,
    assess_expert,
    phrase_vector,
    semantic_similarity,
    visual_similarity,
)
from .space import (
    CalibrationModel,
    EnvironmentDescriptor,
    calibrate,
    distance,
    kernel,
    nearest_neighbor,
    nn_distances,
)
from .storage import EpisodeFrame, StoredRun

__version__ = "0.1.0"

__all__ = [
    "Assessment",
    "CalibrationModel",
    "CompetenceLabel",
    "CompetenceMemory",
    "EnvironmentDescriptor",
    "EpisodeFrame",
    "ExpertAssessment",
    "FeedbackSource",
    "KnowledgeStatement",
    "MemoryEntry",
    "ReferenceAtlas",
    "SemanticLexicon",
    "StoredRun",
    "Verdict",
    "assess",
    "assess_expert",
    "calibrate",
    "distance",
    "incorporate_feedback",
    "kernel",
    "nearest_neighbor",
    "nn_distances",
    "p_known",
    "phrase_vector",
    "semantic_similarity",
    "visual_similarity",
]
