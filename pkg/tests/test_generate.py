from __future__ import annotations

import random
from collections import Counter

import pytest

from shapegame.generate import (
    CURRICULUM_RANK,
    DEFAULT_MODEL,
    PRACTICE_VOCAB,
    PRECONDITIONING_VOCAB,
    TEST_VOCAB,
    GenerationError,
    MarkovModel,
    Phase,
    PhaseSpec,
    build_phase_set,
    dominant_shape,
    make_question,
    plan_distractors,
    sample_corpus,
    sample_program,
    tag_ood,
    vocabulary,
    _weighted,
)
from shapegame.lang import parse_program, total_glyphs
from shapegame.render import image_digest, render_program


def test_singleton_vocabulary_always_single_glyph():
    vocab = vocabulary(["A"], 1, 1)
    rng = random.Random(7)
    for _ in range(200):
        assert sample_program(rng, vocab).source == "A"


def test_sampled_programs_respect_vocabulary():
    rng = random.Random(11)
    for _ in range(1000):
        program = sample_program(rng, PRACTICE_VOCAB)
        assert len(program.source) <= 8
        assert total_glyphs(program) <= PRACTICE_VOCAB.max_total
        for cmd in program.commands:
            assert cmd.shape in PRACTICE_VOCAB.shapes
            assert cmd.rows <= PRACTICE_VOCAB.max_count
            assert cmd.cols <= PRACTICE_VOCAB.max_count


def test_sampled_programs_round_trip():
    rng = random.Random(13)
    for _ in range(1000):
        program = sample_program(rng, TEST_VOCAB)
        assert parse_program(program.source).commands == program.commands


def test_shape_emission_weights():
    # Counting oracle on the raw emission distribution: singles carry twice
    # the weight of doubles, so 3 singles vs 9 doubles gives 6/15 overall.
    rng = random.Random(17)
    counts = Counter(
        _weighted(rng, DEFAULT_MODEL.shape_weights) for _ in range(60_000)
    )
    singles = sum(counts[s] for s in ("A", "B", "C"))
    assert abs(singles / 60_000 - 6 / 15) < 0.01
    for single in ("A", "B", "C"):
        for double in ("AA", "AB", "CC"):
            assert counts[single] > counts[double]


def test_sampled_shape_frequencies_favor_singles():
    rng = random.Random(19)
    counts: Counter[str] = Counter()
    for _ in range(6000):
        for cmd in sample_program(rng, TEST_VOCAB).commands:
            counts[cmd.shape] += 1
    for single in ("A", "B", "C"):
        for double in ("AA", "AB", "AC", "BA", "BB", "BC", "CA", "CB", "CC"):
            assert counts[single] > counts[double], (single, double)


def test_degenerate_forms_are_reduced():
    # A 1xN walk must come out spelled as a row, Nx1 as a column, 1x1 as a
    # bare shape; otherwise two spellings could render identically.
    rng = random.Random(23)
    for _ in range(2000):
        program = sample_program(rng, PRECONDITIONING_VOCAB)
        for cmd, part in zip(program.commands, program.source.split("+")):
            if cmd.rows == 1 and cmd.cols == 1:
                assert part == cmd.shape
            elif cmd.rows == 1:
                assert "*" in part
            elif cmd.cols == 1:
                assert "*" not in part


def test_bad_model_rejected():
    with pytest.raises(ValueError):
        MarkovModel(transitions={"shape": {"number": 0.5, "end": 0.4}})
    with pytest.raises(ValueError):
        MarkovModel(transitions={"number": {"shape": 1.0}})


def test_generation_error_when_budget_exhausted():
    rng = random.Random(29)
    with pytest.raises(GenerationError):
        sample_program(rng, TEST_VOCAB, attempts=0)
    assert sample_program(rng, vocabulary(["AA"], 1, 1)).source == "AA"


def test_tag_ood_examples():
    ref = PRECONDITIONING_VOCAB
    tags = tag_ood(parse_program("A12*12"), ref)
    assert (tags.novel_symbol, tags.novel_number) == (False, True)
    tags = tag_ood(parse_program("AC2"), ref)
    assert (tags.novel_symbol, tags.novel_number) == (True, False)
    tags = tag_ood(parse_program("AC12*2"), ref)
    assert (tags.novel_symbol, tags.novel_number) == (True, True)
    tags = tag_ood(parse_program("BB11+A2"), ref)
    assert tags.category == "none"


def test_dominant_shape():
    assert dominant_shape(parse_program("B12*12")) == "B"
    assert dominant_shape(parse_program("A2+B12*12")) == "B"
    assert dominant_shape(parse_program("A+B")) == "A"
    assert dominant_shape(parse_program("A+B2+A")) == "A"


def test_make_question_shape():
    rng = random.Random(31)
    target = sample_program(rng, PRACTICE_VOCAB)
    q = make_question(
        rng, target, PRACTICE_VOCAB, PRECONDITIONING_VOCAB, Phase.PRACTICE
    )
    assert len(q.candidates) == 4
    digests = [image_digest(img) for img in q.candidates]
    assert len(set(digests)) == 4
    assert q.candidates[q.correct_index].pixels == render_program(target).pixels


def test_distractor_policy_hard_negatives():
    # Post-hoc scan over planned distractors: slot one should usually share
    # the dominant shape, slot two the glyph total; all must differ visually.
    rng = random.Random(37)
    with_shape = with_total = 0
    n = 300
    for _ in range(n):
        target = sample_program(rng, PRACTICE_VOCAB)
        planned = plan_distractors(rng, target, PRACTICE_VOCAB)
        assert len(planned) == 3
        digests = {image_digest(img) for _, img in planned}
        digests.add(image_digest(render_program(target)))
        assert len(digests) == 4
        if any(dominant_shape(p) == dominant_shape(target) for p, _ in planned):
            with_shape += 1
        if any(total_glyphs(p) == total_glyphs(target) for p, _ in planned):
            with_total += 1
    assert with_shape >= 0.9 * n
    assert with_total >= 0.9 * n


def test_correct_index_uniform():
    spec = PhaseSpec(
        Phase.PRACTICE, PRACTICE_VOCAB, PRECONDITIONING_VOCAB, 400, seed=55,
        curriculum=False,
    )
    counts = Counter(q.correct_index for q in build_phase_set(spec))
    assert set(counts) == {0, 1, 2, 3}


def test_build_phase_set_deterministic():
    spec = PhaseSpec(Phase.TEST, TEST_VOCAB, PRACTICE_VOCAB, 40, seed=99)
    a = build_phase_set(spec)
    b = build_phase_set(spec)
    assert [q.target.source for q in a] == [q.target.source for q in b]
    assert [q.correct_index for q in a] == [q.correct_index for q in b]
    assert [
        [image_digest(img) for img in q.candidates] for q in a
    ] == [[image_digest(img) for img in q.candidates] for q in b]


def test_build_phase_set_seed_sensitivity():
    base = PhaseSpec(Phase.TEST, TEST_VOCAB, PRACTICE_VOCAB, 20, seed=1)
    other = PhaseSpec(Phase.TEST, TEST_VOCAB, PRACTICE_VOCAB, 20, seed=2)
    a = [q.target.source for q in build_phase_set(base)]
    b = [q.target.source for q in build_phase_set(other)]
    assert a != b


def test_curriculum_ordering():
    spec = PhaseSpec(Phase.TEST, TEST_VOCAB, PRACTICE_VOCAB, 60, seed=3)
    questions = build_phase_set(spec)
    ranks = [CURRICULUM_RANK[q.tags.category] for q in questions]
    assert ranks == sorted(ranks)
    assert questions[0].tags.category == "none"
    assert set(q.tags.category for q in questions) == {
        "none", "symbol", "number", "both",
    }
    assert [q.id for q in questions] == [f"test-{i:04d}" for i in range(60)]


def test_curriculum_first_novelty_is_isolated():
    spec = PhaseSpec(Phase.TEST, TEST_VOCAB, PRACTICE_VOCAB, 80, seed=5)
    questions = build_phase_set(spec)
    seen_shapes = set(PRACTICE_VOCAB.shapes)
    for q in questions:
        novel = {c.shape for c in q.target.commands} - seen_shapes
        if novel:
            assert not q.tags.novel_number, q.target.source
            seen_shapes |= novel
    max_seen = PRACTICE_VOCAB.max_count
    for q in questions:
        top = max(max(c.rows, c.cols) for c in q.target.commands)
        if top > max_seen:
            assert not q.tags.novel_symbol, q.target.source
            max_seen = top


def test_preconditioning_sets_are_in_distribution():
    spec = PhaseSpec(
        Phase.PRECONDITIONING, PRECONDITIONING_VOCAB, PRECONDITIONING_VOCAB,
        30, seed=8,
    )
    for q in build_phase_set(spec):
        assert q.tags.category == "none"


def test_sample_corpus_deterministic():
    a = sample_corpus(PRECONDITIONING_VOCAB, 25, seed=4)
    b = sample_corpus(PRECONDITIONING_VOCAB, 25, seed=4)
    assert [(i, p.source) for i, p, _ in a] == [(i, p.source) for i, p, _ in b]
    assert all(x.pixels == y.pixels for (_, _, x), (_, _, y) in zip(a, b))
