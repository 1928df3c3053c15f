"""Competence assessment from prior semantic knowledge.

High-level statements such as ``incompetent:nature`` are scored against the
current environment by combining two similarities over a labeled reference
atlas: how visually close the query embedding is to each atlas environment,
and how semantically close that environment's label is to the statement's
concept in word-embedding space. The per-statement score is the maximum of
the product of the two over all atlas entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .assessment import CompetenceLabel
from .errors import AllTokensOutOfVocabulary, EmptyAtlas, ZeroVector
from .space import CalibrationModel, EnvironmentDescriptor, distance, kernel

__all__ = [
    "SemanticLexicon",
    "KnowledgeStatement",
    "ReferenceAtlas",
    "StatementScore",
    "ExpertAssessment",
    "tokenize",
    "phrase_vector",
    "semantic_similarity",
    "visual_similarity",
    "assess_expert",
]


def tokenize(phrase: str) -> list[str]:
    """Lowercased whitespace tokens of a concept phrase."""
    return phrase.lower().split()


@dataclass(frozen=True)
class SemanticLexicon:
    """Word-embedding vocabulary: lowercase token -> vector."""

    vectors: Mapping[str, tuple[float, ...]]

    def __post_init__(self) -> None:
        dim: int | None = None
        for token, vec in self.vectors.items():
            if dim is None:
                dim = len(vec)
            elif len(vec) != dim:
                raise ValueError(f"token {token!r} has dimension {len(vec)}, expected {dim}")
            norm_sq = 0.0
            for x in vec:
                if not math.isfinite(x):
                    raise ValueError(f"token {token!r} has a non-finite coordinate")
                norm_sq += x * x
            if norm_sq == 0.0:
                raise ValueError(f"token {token!r} has a zero-norm vector")
        if dim is not None and dim < 1:
            raise ValueError("lexicon dimension must be at least 1")

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    @property
    def dimension(self) -> int | None:
        for vec in self.vectors.values():
            return len(vec)
        return None


@dataclass(frozen=True)
class KnowledgeStatement:
    """Polarity-tagged concept phrase, e.g. incompetent:"nature"."""

    polarity: CompetenceLabel
    concept: str

    def __post_init__(self) -> None:
        if not tokenize(self.concept):
            raise ValueError("statement concept must contain at least one token")

    @classmethod
    def parse(cls, text: str) -> "KnowledgeStatement":
        """Parse the configuration syntax ``competent:<phrase>`` /
        ``incompetent:<phrase>``."""
        head, sep, phrase = text.partition(":")
        if not sep:
            raise ValueError(
                f"knowledge statement must look like 'incompetent:<phrase>', got {text!r}"
            )
        return cls(polarity=CompetenceLabel.parse(head), concept=phrase.strip().lower())

    def __str__(self) -> str:
        return f"{self.polarity.value}:{self.concept}"


@dataclass(frozen=True)
class ReferenceAtlas:
    """Labeled environment collection the expert reasons over.

    Every entry must carry a scene-category label; vectors share one
    dimension.
    """

    environments: tuple[EnvironmentDescriptor, ...]

    def __post_init__(self) -> None:
        dim: int | None = None
        for env in self.environments:
            if not env.label:
                raise ValueError(f"atlas entry {env.id!r} has no label")
            if dim is None:
                dim = env.dimension
            elif env.dimension != dim:
                raise ValueError(
                    f"atlas entry {env.id!r} has dimension {env.dimension}, expected {dim}"
                )

    def __len__(self) -> int:
        return len(self.environments)


@dataclass(frozen=True)
class StatementScore:
    statement: KnowledgeStatement
    score: float
    witness: str


@dataclass(frozen=True)
class ExpertAssessment:
    """Per-statement scores plus the polarity-wise maxima."""

    per_statement: tuple[StatementScore, ...]
    p_incompetent: float
    p_competent: float


def phrase_vector(phrase: str, lexicon: SemanticLexicon) -> tuple[float, ...]:
    """Unit-length embedding of a phrase: mean of in-lexicon token vectors.

    Tokens missing from the lexicon are skipped; the mean is renormalized.
    """
    tokens = tokenize(phrase)
    if not tokens:
        raise ValueError("phrase must contain at least one token")
    found = [lexicon.vectors[t] for t in tokens if t in lexicon.vectors]
    if not found:
        raise AllTokensOutOfVocabulary(f"no token of {phrase!r} is in the lexicon")
    dim = len(found[0])
    mean = [sum(vec[i] for vec in found) / len(found) for i in range(dim)]
    norm = math.sqrt(sum(x * x for x in mean))
    if norm == 0.0:
        raise ZeroVector(f"token vectors of {phrase!r} cancel out to a zero mean")
    return tuple(x / norm for x in mean)


def _clipped_cosine(u: Sequence[float], v: Sequence[float]) -> float:
    cos = sum(a * b for a, b in zip(u, v))
    return cos if cos > 0.0 else 0.0


def semantic_similarity(a: str, b: str, lexicon: SemanticLexicon) -> float:
    """Cosine similarity of two phrase embeddings, clipped below at 0.

    Negative cosines mean "unrelated", which should annihilate a combined
    score rather than contribute to it.
    """
    return _clipped_cosine(phrase_vector(a, lexicon), phrase_vector(b, lexicon))


def visual_similarity(
    query: EnvironmentDescriptor,
    env: EnvironmentDescriptor,
    calib: CalibrationModel,
) -> float:
    """Gaussian kernel of the embedding distance at the calibrated width."""
    return kernel(distance(query, env), calib.kernel_width)


def assess_expert(
    query: EnvironmentDescriptor,
    atlas: ReferenceAtlas,
    statements: Sequence[KnowledgeStatement],
    lexicon: SemanticLexicon,
    calib: CalibrationModel,
) -> ExpertAssessment:
    """Score each knowledge statement against the query environment.

    statement score = max over atlas entries of
    visual_similarity(query, entry) * semantic_similarity(entry label, concept),
    with ties resolved to the lowest atlas index. Atlas entries whose label is
    fully out-of-vocabulary contribute semantic similarity 0; an unresolvable
    statement concept is an error.
    """
    if len(atlas) == 0:
        raise EmptyAtlas("reference atlas holds no environments")

    # Label embeddings are shared across statements; OOV labels score 0.
    label_vectors: dict[str, tuple[float, ...] | None] = {}
    for env in atlas.environments:
        assert env.label is not None
        if env.label not in label_vectors:
            try:
                label_vectors[env.label] = phrase_vector(env.label, lexicon)
            except (AllTokensOutOfVocabulary, ZeroVector):
                label_vectors[env.label] = None

    visuals = [visual_similarity(query, env, calib) for env in atlas.environments]

    scored: list[StatementScore] = []
    p_incompetent = 0.0
    p_competent = 0.0
    for statement in statements:
        concept_vec = phrase_vector(statement.concept, lexicon)
        best_score = -1.0
        best_witness = ""
        for env, visual in zip(atlas.environments, visuals):
            label_vec = label_vectors[env.label]  # type: ignore[index]
            semantic = 0.0 if label_vec is None else _clipped_cosine(label_vec, concept_vec)
            combined = visual * semantic
            if combined > best_score:
                best_score = combined
                best_witness = env.id
        scored.append(StatementScore(statement=statement, score=best_score, witness=best_witness))
        if statement.polarity is CompetenceLabel.INCOMPETENT:
            p_incompetent = max(p_incompetent, best_score)
        else:
            p_competent = max(p_competent, best_score)

    return ExpertAssessment(
        per_statement=tuple(scored),
        p_incompetent=p_incompetent,
        p_competent=p_competent,
    )
