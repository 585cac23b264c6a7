from __future__ import annotations

import sys

import pytest

from shapegame.cli import main
from shapegame.manifest import read_manifest, read_records
from shapegame.results import read_results

SMALL_CFG = """
[phases]
practice_questions = 6
test_questions = 6
"""


@pytest.fixture()
def small_cfg(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CFG)
    return str(path)


def test_render_pgm(tmp_path, capsys):
    out = tmp_path / "grid.pgm"
    assert main(["render", "B12*12", "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"P5\n40 40\n255\n")


def test_render_png(tmp_path):
    out = tmp_path / "grid.png"
    assert main(["render", "B12*12", "--out", str(out)]) == 0
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_render_rejects_bad_program(tmp_path, capsys):
    code = main(["render", "AAB2", "--out", str(tmp_path / "x.pgm")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["gen"])  # --out is required
    assert exc.value.code == 2


def test_gen_play_score_pipeline(tmp_path, small_cfg, capsys):
    data = tmp_path / "data"
    assert main(["gen", "--out", str(data), "--seed", "5",
                 "--config", small_cfg]) == 0
    for phase in ("practice", "test"):
        manifest = read_manifest(data / phase)
        assert manifest.header["n_questions"] == 6

    run = tmp_path / "run"
    assert main(["play", "--dataset", str(data), "--out", str(run),
                 "--speaker", "oracle", "--listener", "oracle",
                 "--config", small_cfg]) == 0
    practice = read_records(run / "records-practice.jsonl")
    test = read_records(run / "records-test.jsonl")
    assert len(practice) == len(test) == 6
    assert all(r.correct for r in practice + test)
    table = read_results(run / "results.csv")
    assert [row.label for row in table.runs] == ["practice", "test"]
    assert table.runs[0].breakdown.overall.correct == 6

    out = tmp_path / "scored.csv"
    assert main(["score", str(run / "records-test.jsonl"),
                 "--out", str(out)]) == 0
    scored = read_results(out)
    assert scored.runs[0].breakdown.overall == table.runs[1].breakdown.overall


def test_gen_deterministic(tmp_path, small_cfg):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for out in (a, b):
        assert main(["gen", "--out", str(out), "--seed", "9",
                     "--config", small_cfg]) == 0
    for rel in ("practice/manifest.jsonl", "test/manifest.jsonl"):
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_play_random_listener(tmp_path, small_cfg):
    data = tmp_path / "data"
    main(["gen", "--out", str(data), "--seed", "5", "--config", small_cfg])
    run = tmp_path / "run"
    assert main(["play", "--dataset", str(data), "--out", str(run),
                 "--speaker", "random", "--listener", "random",
                 "--seed", "3", "--config", small_cfg]) == 0
    records = read_records(run / "records-test.jsonl")
    assert len(records) == 6


def test_play_subprocess_agent(tmp_path, small_cfg):
    data = tmp_path / "data"
    main(["gen", "--out", str(data), "--seed", "5", "--config", small_cfg])
    agent = tmp_path / "agent.py"
    agent.write_text(
        "import json, sys\n"
        "for line in sys.stdin:\n"
        "    f = json.loads(line)\n"
        "    if 'role' not in f: continue\n"
        "    if f['role'] == 'speaker':\n"
        "        print(json.dumps({'message': 'A'}), flush=True)\n"
        "    else:\n"
        "        print(json.dumps({'choice': 1}), flush=True)\n"
    )
    run = tmp_path / "run"
    assert main(["play", "--dataset", str(data), "--out", str(run),
                 "--speaker", f"cmd:{sys.executable} {agent}",
                 "--listener", f"cmd:{sys.executable} {agent}",
                 "--config", small_cfg]) == 0
    records = read_records(run / "records-practice.jsonl")
    assert all(r.message == "A" and r.chosen == 1 for r in records)


def test_score_aggregate_rows(tmp_path, small_cfg):
    data = tmp_path / "data"
    main(["gen", "--out", str(data), "--seed", "5", "--config", small_cfg])
    runs = []
    for seed in (1, 2):
        run = tmp_path / f"run{seed}"
        main(["play", "--dataset", str(data), "--out", str(run),
              "--speaker", "oracle", "--listener", "random",
              "--seed", str(seed), "--config", small_cfg])
        runs.append(str(run / "records-test.jsonl"))
    out = tmp_path / "agg.csv"
    assert main(["score", *runs, "--aggregate", "--out", str(out)]) == 0
    table = read_results(out)
    assert len(table.aggregates) == 1
    assert table.aggregates[0].label.startswith("test (n=2)")


def test_gen_desk_preset(tmp_path):
    out = tmp_path / "desk"
    assert main(["gen", "--out", str(out), "--seed", "1", "--preset", "desk",
                 "--corpus-size", "30", "--train-questions", "8",
                 "--eval-questions", "4"]) == 0
    assert (out / "corpus" / "manifest.jsonl").exists()
    assert read_manifest(out / "train").header["n_questions"] == 8
    assert read_manifest(out / "eval").header["n_questions"] == 4


def test_play_single_manifest_dataset(tmp_path):
    out = tmp_path / "desk"
    main(["gen", "--out", str(out), "--seed", "1", "--preset", "desk",
          "--corpus-size", "0", "--train-questions", "2",
          "--eval-questions", "5"])
    run = tmp_path / "run"
    assert main(["play", "--dataset", str(out / "eval"), "--out", str(run),
                 "--speaker", "oracle", "--listener", "oracle"]) == 0
    records = read_records(run / "records-preconditioning.jsonl")
    assert len(records) == 5
    assert all(r.correct for r in records)


def test_config_subcommand(capsys):
    assert main(["config"]) == 0
    text = capsys.readouterr().out
    assert "[vocab.test]" in text
    assert "practice_questions = 100" in text
