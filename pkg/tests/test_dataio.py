from __future__ import annotations

import math

import pytest

from shapegame.engine import AccuracyBreakdown, CategoryScore, Phase, TrialRecord, score
from shapegame.generate import (
    OODTags,
    PRACTICE_VOCAB,
    PRECONDITIONING_VOCAB,
    PhaseSpec,
    build_phase_set,
    sample_corpus,
)
from shapegame.manifest import (
    ManifestError,
    load_questions,
    read_corpus,
    read_manifest,
    read_records,
    spec_digest,
    write_corpus,
    write_manifest,
    write_records,
)
from shapegame.results import (
    AggregateRow,
    ResultsTable,
    RunRow,
    build_table,
    read_results,
    render_results,
    write_results,
)


@pytest.fixture(scope="module")
def small_spec():
    return PhaseSpec(Phase.PRACTICE, PRACTICE_VOCAB, PRECONDITIONING_VOCAB, 8, seed=42)


@pytest.fixture(scope="module")
def small_questions(small_spec):
    return build_phase_set(small_spec)


def test_manifest_round_trip(tmp_path, small_spec, small_questions):
    write_manifest(small_questions, tmp_path, small_spec)
    manifest = read_manifest(tmp_path)
    assert manifest.header["format_version"] == 1
    assert manifest.header["ood_columns"] == "disjoint"
    assert manifest.header["seed"] == 42
    assert manifest.header["spec_digest"] == spec_digest(small_spec)
    assert sum(manifest.header["category_counts"].values()) == 8
    loaded = load_questions(manifest)
    assert len(loaded) == len(small_questions)
    for got, want in zip(loaded, small_questions):
        assert got.id == want.id
        assert got.target.commands == want.target.commands
        assert got.correct_index == want.correct_index
        assert got.tags == want.tags
        for a, b in zip(got.candidates, want.candidates):
            assert a.pixels == b.pixels


def test_manifest_detects_tampering(tmp_path, small_spec, small_questions):
    write_manifest(small_questions, tmp_path, small_spec)
    victim = next((tmp_path / "images").iterdir())
    data = bytearray(victim.read_bytes())
    data[-1] ^= 0xFF
    victim.write_bytes(bytes(data))
    with pytest.raises(ManifestError, match="digest mismatch"):
        read_manifest(tmp_path)


def test_manifest_detects_missing_image(tmp_path, small_spec, small_questions):
    write_manifest(small_questions, tmp_path, small_spec)
    next((tmp_path / "images").iterdir()).unlink()
    with pytest.raises(ManifestError, match="missing image"):
        read_manifest(tmp_path)


def test_manifest_rejects_unknown_version(tmp_path, small_spec, small_questions):
    path = write_manifest(small_questions, tmp_path, small_spec)
    text = path.read_text().replace('"format_version":1', '"format_version":9')
    path.write_text(text)
    with pytest.raises(ManifestError, match="version"):
        read_manifest(tmp_path)


def test_manifest_bytes_reproducible(tmp_path, small_spec, small_questions):
    a = tmp_path / "a"
    b = tmp_path / "b"
    write_manifest(small_questions, a, small_spec)
    write_manifest(small_questions, b, small_spec)
    assert (a / "manifest.jsonl").read_bytes() == (b / "manifest.jsonl").read_bytes()
    for file in sorted((a / "images").iterdir()):
        twin = b / "images" / file.name
        assert file.read_bytes() == twin.read_bytes()


def test_records_round_trip(tmp_path):
    records = [
        TrialRecord("q-1", Phase.PRACTICE, "A*2", 1, True, OODTags(False, False)),
        TrialRecord("q-2", Phase.PRACTICE, None, None, False,
                    OODTags(True, False), "invalid message: length 9 > 8"),
        TrialRecord("q-3", Phase.TEST, "BB11", 0, False, OODTags(True, True)),
    ]
    path = tmp_path / "records.jsonl"
    write_records(records, path)
    assert read_records(path) == records


def test_corpus_round_trip(tmp_path):
    samples = sample_corpus(PRECONDITIONING_VOCAB, 12, seed=9)
    write_corpus(samples, tmp_path, seed=9)
    rows = read_corpus(tmp_path)
    assert [r[0] for r in rows] == [s[0] for s in samples]
    assert [r[1] for r in rows] == [s[1].source for s in samples]
    assert all(r[2].pixels == s[2].pixels for r, s in zip(rows, samples))


def _breakdown(pairs) -> AccuracyBreakdown:
    return AccuracyBreakdown(*[CategoryScore(c, t) for c, t in pairs])


def test_results_csv_shape(tmp_path):
    table = build_table(
        [("oracle/practice", _breakdown([(85, 100), (10, 15), (5, 10), (1, 5)]))],
        [("practice (n=2)", [8, 10])],
        points_per_phase=10,
    )
    text = render_results(table)
    lines = text.splitlines()
    assert lines[0] == "# ood_categories=disjoint"
    header = lines[1].split(",")
    assert header.count("overall_accuracy") == 1
    accuracy_columns = [c for c in header if c.endswith("_accuracy")]
    assert accuracy_columns == [
        "overall_accuracy", "ood_symbol_accuracy",
        "ood_number_accuracy", "ood_both_accuracy",
    ]
    run = lines[2].split(",")
    assert run[:5] == ["run", "oracle/practice", "0.850000", "85", "100"]
    agg = lines[3].split(",")
    assert agg[0] == "aggregate"
    assert agg[14] == "9.000000"
    assert agg[15] == f"{math.sqrt(2):.6f}"


def test_results_empty_bucket(tmp_path):
    table = build_table([("run", _breakdown([(3, 4), (1, 2), (0, 0), (0, 0)]))])
    text = render_results(table)
    assert ",n/a (0/0)," in text


def test_results_round_trip(tmp_path):
    table = build_table(
        [
            ("a/practice", _breakdown([(85, 100), (10, 15), (5, 10), (0, 0)])),
            ("a/test", _breakdown([(60, 100), (12, 20), (8, 16), (2, 8)])),
        ],
        [("test (n=3)", [5, 7, 9])],
    )
    path = tmp_path / "results.csv"
    write_results(table, path)
    back = read_results(path)
    assert back == table
    rewritten = tmp_path / "again.csv"
    write_results(back, rewritten)
    assert rewritten.read_bytes() == path.read_bytes()


def test_results_scoring_consistency(small_questions):
    records = [
        TrialRecord(q.id, q.phase, "A", 0, 0 == q.correct_index, q.tags)
        for q in small_questions
    ]
    breakdown = score(records)
    table = build_table([("pick-zero/practice", breakdown)])
    text = render_results(table)
    run = text.splitlines()[2].split(",")
    assert run[3] == str(breakdown.overall.correct)
    assert run[4] == str(len(small_questions))
