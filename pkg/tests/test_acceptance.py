"""Acceptance suite.

Each test implements one acceptance criterion at its stated tolerance and
prints a single ``[criterion N] PASS/FAIL`` line (visible with ``pytest -s``
or on failure). The suite exercises only the core package: no service, no
panel.
"""

import functools
import json
import math
import random

import pytest

from compass import (
    CompetenceLabel,
    CompetenceMemory,
    EnvironmentDescriptor,
    FeedbackSource,
    KnowledgeStatement,
    ReferenceAtlas,
    SemanticLexicon,
    Verdict,
    assess,
    assess_expert,
    calibrate,
    incorporate_feedback,
    kernel,
    p_known,
)
from compass.replay import Action, OracleFeedback, RunConfig, replay, run_episode
from compass.space import nn_distances
from compass.storage import (
    StoredRun,
    load_run,
    save_embeddings,
    save_episode,
    save_run,
)
from compass.synth import generate_synthetic_episode

from conftest import TWO_CLUSTER_SPEC, calibration_for, make_descriptor


def criterion(number, title):
    def decorate(test):
        @functools.wraps(test)
        def wrapper(*args, **kwargs):
            try:
                test(*args, **kwargs)
            except BaseException:
                print(f"[criterion {number}] FAIL - {title}")
                raise
            print(f"[criterion {number}] PASS - {title}")

        return wrapper

    return decorate


def random_reference(rng, count, dim):
    return [
        EnvironmentDescriptor(
            id=f"r{i}", vector=tuple(rng.uniform(-10.0, 10.0) for _ in range(dim))
        )
        for i in range(count)
    ]


@criterion(1, "calibration meets the mean-0.5 constraint")
def test_calibration_constraint():
    rng = random.Random(20260810)
    for _ in range(20):
        dim = rng.randint(2, 64)
        count = rng.randint(10, 200)
        reference = random_reference(rng, count, dim)
        model = calibrate(reference)
        ds = nn_distances(reference)
        mean = sum(kernel(d, model.kernel_width) for d in ds) / len(ds)
        assert abs(mean - 0.5) <= 1e-9

    # the 1-D set {0,1,3} against an independent grid+bisection root-finder
    line = [make_descriptor([v], id=f"p{v}") for v in (0.0, 1.0, 3.0)]
    model = calibrate(line)

    def objective(s):
        return (2 * math.exp(-1.0 / s**2) + math.exp(-4.0 / s**2)) / 3.0 - 0.5

    lo = None
    grid = [0.05 * k for k in range(1, 400)]
    for a, b in zip(grid, grid[1:]):
        if objective(a) < 0.0 <= objective(b):
            lo, hi = a, b
            break
    assert lo is not None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if objective(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    oracle = 0.5 * (lo + hi)
    assert abs(model.kernel_width - oracle) <= 1e-3
    assert abs(model.kernel_width - 1.543) <= 1e-3

    # two points at distance d: closed form d / sqrt(ln 2)
    for d in (0.25, 1.0, 57.5):
        pair = [make_descriptor([0.0], id="a"), make_descriptor([d], id="b")]
        expected = d / math.sqrt(math.log(2.0))
        got = calibrate(pair).kernel_width
        assert abs(got - expected) / expected <= 1e-9


@criterion(2, "empty memory scores zero and asks the human")
def test_empty_memory_behavior():
    rng = random.Random(2)
    for _ in range(25):
        dim = rng.randint(1, 16)
        calib = calibration_for(dim, width=rng.uniform(0.1, 10.0))
        query = make_descriptor([rng.uniform(-100, 100) for _ in range(dim)], id="q")
        assert p_known(query, CompetenceMemory(), calib) == 0.0
        result = assess(query, CompetenceMemory(), calib, rng.uniform(0.05, 0.95))
        assert result.verdict is Verdict.UNKNOWN
        assert result.competence_score is None

    # first frame of any fresh run produces ASK_HUMAN
    frames, reference = generate_synthetic_episode(TWO_CLUSTER_SPEC, seed=99)
    calibration = calibrate(reference)
    report, _ = replay(frames, calibration, CompetenceMemory(), 0.5, OracleFeedback())
    assert report.events[0].action is Action.ASK_HUMAN


@criterion(3, "exact matches score +/-1 and half-width entries e^-0.25")
def test_signed_score_contract():
    for width in (0.37, 1.0, 1.543, 12.0):
        calib = calibration_for(3, width=width)
        spot = make_descriptor([1.0, 2.0, 3.0], id="spot")

        competent = incorporate_feedback(CompetenceMemory(), spot, CompetenceLabel.COMPETENT)
        assert assess(spot, competent, calib, 0.5).competence_score == 1.0

        incompetent = incorporate_feedback(CompetenceMemory(), spot, CompetenceLabel.INCOMPETENT)
        assert assess(incompetent.entries[0].descriptor, incompetent, calib, 0.5).competence_score == -1.0

        # entry at exactly half the kernel width
        entry = make_descriptor([0.0, 0.0, 0.0], id="entry")
        query = make_descriptor([0.5 * width, 0.0, 0.0], id="q")
        for label, sign in ((CompetenceLabel.COMPETENT, 1), (CompetenceLabel.INCOMPETENT, -1)):
            memory = incorporate_feedback(CompetenceMemory(), entry, label)
            result = assess(query, memory, calib, 0.5)
            assert result.verdict is Verdict.KNOWN
            assert abs(abs(result.competence_score) - math.exp(-0.25)) <= 1e-12
            assert math.copysign(1, result.competence_score) == sign


@criterion(4, "two-cluster scenario: ask twice, generalize, replay silently")
def test_scenario_replay(tmp_path):
    def build(base):
        frames, reference = generate_synthetic_episode(TWO_CLUSTER_SPEC, seed=42)
        episode_path = base / "episode.jsonl"
        calibration_path = base / "calibration.json"
        save_episode(frames, episode_path)
        save_embeddings(reference, base / "reference.jsonl")
        calibration = calibrate(reference, provenance={"reference": "reference.jsonl"})
        save_run(StoredRun(calibration=calibration, memory=CompetenceMemory()), calibration_path)
        return frames, reference, calibration, episode_path, calibration_path

    frames, reference, calibration, episode_path, calibration_path = build(tmp_path)

    # constructive precondition: intra-cluster kernel >= tau, inter < tau
    tau = 0.5
    by_cluster = {"corridor": [], "lab": []}
    for frame in frames:
        by_cluster[frame.descriptor.label].append(frame.descriptor)
    for members in by_cluster.values():
        first = members[0]
        for other in members[1:]:
            assert kernel(math.dist(first.vector, other.vector), calibration.kernel_width) >= tau
    for a in by_cluster["corridor"]:
        for b in by_cluster["lab"]:
            assert kernel(math.dist(a.vector, b.vector), calibration.kernel_width) < tau

    state_path = tmp_path / "state.json"
    config = RunConfig(
        mode="oracle",
        episode_path=episode_path,
        calibration_path=calibration_path,
        run_state_path=state_path,
        threshold=tau,
        report_path=tmp_path / "report.jsonl",
    )
    first_pass = run_episode(config, OracleFeedback())
    assert first_pass.ask_count == 2
    asked = set()
    for frame, event in zip(frames, first_pass.events):
        cluster = frame.descriptor.label
        if cluster not in asked:
            assert event.action is Action.ASK_HUMAN
            asked.add(cluster)
        elif cluster == "corridor":
            assert event.action is Action.PROCEED
        else:
            assert event.action is Action.FLAG_INCOMPETENT

    second_pass = run_episode(config, OracleFeedback())
    assert second_pass.ask_count == 0
    for frame, event in zip(frames, second_pass.events):
        assert event.verdict is Verdict.KNOWN
        expected = (
            Action.PROCEED if frame.descriptor.label == "corridor" else Action.FLAG_INCOMPETENT
        )
        assert event.action is expected

    # two identical runs produce byte-identical logs, timestamps excluded
    logs = []
    for name in ("left", "right"):
        base = tmp_path / name
        base.mkdir()
        _, _, _, episode_path, calibration_path = build(base)
        report_path = base / "report.jsonl"
        run_episode(
            RunConfig(
                mode="oracle",
                episode_path=episode_path,
                calibration_path=calibration_path,
                run_state_path=base / "state.json",
                threshold=tau,
                report_path=report_path,
            ),
            OracleFeedback(),
        )
        stripped_lines = []
        for line in report_path.read_text().splitlines():
            record = json.loads(line)
            record.pop("wall_time", None)
            stripped_lines.append(json.dumps(record, separators=(",", ":")))
        logs.append("\n".join(stripped_lines).encode())
    assert logs[0] == logs[1]


@criterion(5, "knowledge statements reproduce both worked cases exactly")
def test_expert_worked_cases():
    lexicon = SemanticLexicon(
        vectors={"nature": (1.0, 0.0), "forest": (1.0, 0.0), "office": (0.0, 1.0)}
    )
    separation = 2.0
    atlas = ReferenceAtlas(
        environments=(
            make_descriptor([0.0, 0.0], id="env-forest", label="forest"),
            make_descriptor([separation, 0.0], id="env-office", label="office"),
        )
    )
    calib = calibration_for(2)
    statement = [KnowledgeStatement.parse("incompetent:nature")]

    def place(d_forest, d_office):
        x = (d_forest**2 - d_office**2 + separation**2) / (2 * separation)
        y = math.sqrt(d_forest**2 - x**2)
        return make_descriptor([x, y], id="query")

    # park-like: visually 0.5 to forest, 0.05 to office -> p_incompetent 0.5
    park = place(math.sqrt(-math.log(0.5)), math.sqrt(-math.log(0.05)))
    result = assess_expert(park, atlas, statement, lexicon, calib)
    assert abs(result.p_incompetent - 0.5) <= 1e-12
    assert result.per_statement[0].witness == "env-forest"

    # desk-like: visually 0.9 to office, 0.02 to forest -> p_incompetent 0.02
    desk = place(math.sqrt(-math.log(0.02)), math.sqrt(-math.log(0.9)))
    result = assess_expert(desk, atlas, statement, lexicon, calib)
    assert abs(result.p_incompetent - 0.02) <= 1e-12

    # brute-force double-loop equivalence on 50 random atlases
    rng = random.Random(5)
    words = [f"w{i}" for i in range(30)]
    big_lexicon = SemanticLexicon(
        vectors={w: tuple(rng.uniform(-1, 1) for _ in range(8)) for w in words}
    )
    wide_calib = calibration_for(6, width=3.0)
    for _ in range(50):
        atlas = ReferenceAtlas(
            environments=tuple(
                EnvironmentDescriptor(
                    id=f"e{i}",
                    vector=tuple(rng.uniform(-5, 5) for _ in range(6)),
                    label=rng.choice(words),
                )
                for i in range(rng.randint(1, 500))
            )
        )
        statements = [
            KnowledgeStatement(rng.choice(list(CompetenceLabel)), rng.choice(words))
            for _ in range(rng.randint(1, 3))
        ]
        query = make_descriptor([rng.uniform(-5, 5) for _ in range(6)], id="q")
        got = assess_expert(query, atlas, statements, big_lexicon, wide_calib)
        for statement, scored in zip(statements, got.per_statement):
            c_raw = big_lexicon.vectors[statement.concept]
            c_norm = math.sqrt(sum(x * x for x in c_raw))
            concept = [x / c_norm for x in c_raw]
            best, best_id = -1.0, ""
            for env in atlas.environments:
                l_raw = big_lexicon.vectors[env.label]
                l_norm = math.sqrt(sum(x * x for x in l_raw))
                cos = sum(a / l_norm * b for a, b in zip(l_raw, concept))
                semantic = cos if cos > 0.0 else 0.0
                visual = math.exp(
                    -((math.dist(query.vector, env.vector) / wide_calib.kernel_width) ** 2)
                )
                combined = visual * semantic
                if combined > best:
                    best, best_id = combined, env.id
            assert scored.score == best
            assert scored.witness == best_id


@criterion(6, "appending memory never lowers p_known")
def test_monotone_knowledge():
    rng = random.Random(6)
    for _ in range(1000):
        dim = rng.randint(1, 6)
        calib = calibration_for(dim, width=rng.uniform(0.2, 5.0))
        memory = CompetenceMemory()
        for i in range(rng.randint(0, 8)):
            memory = incorporate_feedback(
                memory,
                make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id=f"m{i}"),
                rng.choice(list(CompetenceLabel)),
            )
        query = make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id="q")
        new_entry = make_descriptor([rng.uniform(-5, 5) for _ in range(dim)], id="new")
        before = p_known(query, memory, calib)
        grown = incorporate_feedback(memory, new_entry, CompetenceLabel.COMPETENT)
        after = p_known(query, grown, calib)
        assert after >= before
        old_best = min(
            (math.dist(query.vector, e.descriptor.vector) for e in memory.entries),
            default=math.inf,
        )
        if math.dist(query.vector, new_entry.vector) >= old_best:
            assert after == before


@criterion(7, "persistence round trip is field- and bit-faithful")
def test_persistence_round_trip(tmp_path):
    rng = random.Random(7)
    reference = random_reference(rng, 25, 5)
    calibration = calibrate(reference, provenance={"reference": "inline", "pass": "first"})
    memory = CompetenceMemory()
    for i in range(6):
        memory = incorporate_feedback(
            memory,
            EnvironmentDescriptor(
                id=f"m{i}",
                vector=tuple(rng.uniform(-10, 10) for _ in range(5)),
                label="corridor" if i % 2 else None,
                image_ref=f"img/{i}.png" if i == 0 else None,
            ),
            rng.choice(list(CompetenceLabel)),
            rng.choice(list(FeedbackSource)),
        )
    run = StoredRun(calibration=calibration, memory=memory)
    path = tmp_path / "run.json"
    save_run(run, path)
    loaded = load_run(path)
    assert loaded == run
    assert loaded.calibration.kernel_width == run.calibration.kernel_width

    query = make_descriptor([rng.uniform(-10, 10) for _ in range(5)], id="probe")
    before = assess(query, run.memory, run.calibration, 0.5)
    after = assess(query, loaded.memory, loaded.calibration, 0.5)
    assert before == after  # bit-identical fields throughout


@criterion(8, "scaling every vector by 3.7 scales the width and nothing else")
def test_scaling_equivariance():
    c = 3.7
    rng = random.Random(8)
    for _ in range(5):
        dim = rng.randint(2, 8)
        reference = random_reference(rng, rng.randint(10, 40), dim)
        scaled_reference = [
            EnvironmentDescriptor(id=e.id, vector=tuple(c * x for x in e.vector))
            for e in reference
        ]
        base = calibrate(reference)
        scaled = calibrate(scaled_reference)
        assert abs(scaled.kernel_width - c * base.kernel_width) / (c * base.kernel_width) <= 1e-9

        memory = CompetenceMemory()
        scaled_memory = CompetenceMemory()
        for i in range(4):
            values = [rng.uniform(-10, 10) for _ in range(dim)]
            label = rng.choice(list(CompetenceLabel))
            memory = incorporate_feedback(
                memory, make_descriptor(values, id=f"m{i}"), label
            )
            scaled_memory = incorporate_feedback(
                scaled_memory, make_descriptor([c * v for v in values], id=f"m{i}"), label
            )
        for _ in range(10):
            values = [rng.uniform(-10, 10) for _ in range(dim)]
            p = p_known(make_descriptor(values, id="q"), memory, base)
            p_scaled = p_known(
                make_descriptor([c * v for v in values], id="q"), scaled_memory, scaled
            )
            assert abs(p - p_scaled) <= 1e-9
