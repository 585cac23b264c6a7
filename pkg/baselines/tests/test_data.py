"""Reader tests against hand-written artifact bytes."""

import json

import pytest
import torch

from baselines.data import (
    dataset_digest,
    load_corpus,
    load_questions,
    read_pgm,
)


def write_pgm_bytes(path, width, height, pixels, maxval=255, comment=False):
    note = "# a comment\n" if comment else ""
    header = f"P5\n{note}{width} {height}\n{maxval}\n"
    path.write_bytes(header.encode() + bytes(pixels))


class TestReadPgm:
    def test_values_and_shape(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm_bytes(path, 3, 2, [0, 255, 0, 255, 0, 255])
        image = read_pgm(path)
        assert image.shape == (1, 2, 3)
        assert image.dtype == torch.float32
        assert image.flatten().tolist() == [0.0, 1.0, 0.0, 1.0, 0.0, 1.0]

    def test_comment_lines_are_skipped(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm_bytes(path, 2, 1, [255, 0], comment=True)
        assert read_pgm(path).flatten().tolist() == [1.0, 0.0]

    def test_maxval_scales(self, tmp_path):
        path = tmp_path / "img.pgm"
        write_pgm_bytes(path, 1, 1, [100], maxval=200)
        assert read_pgm(path).item() == pytest.approx(0.5)

    def test_rejects_other_formats(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P2\n1 1\n255\n0\n")
        with pytest.raises(ValueError, match="not a binary PGM"):
            read_pgm(path)

    def test_rejects_truncated_pixels(self, tmp_path):
        path = tmp_path / "img.pgm"
        path.write_bytes(b"P5\n2 2\n255\n\x00\x01")
        with pytest.raises(ValueError, match="truncated"):
            read_pgm(path)


def write_corpus_dir(root, rows):
    (root / "images").mkdir(parents=True)
    lines = [json.dumps({"kind": "corpus", "format_version": 1, "count": len(rows)})]
    for i, (program, pixels) in enumerate(rows):
        rel = f"images/c{i}.pgm"
        write_pgm_bytes(root / rel, 2, 2, pixels)
        lines.append(json.dumps({"id": f"c{i}", "program": program, "image": rel}))
    (root / "manifest.jsonl").write_text("\n".join(lines) + "\n")


def write_question_dir(root, n, correct):
    (root / "images").mkdir(parents=True)
    lines = [json.dumps({"kind": "manifest", "format_version": 1, "n_questions": n})]
    for i in range(n):
        paths = []
        for j in range(4):
            rel = f"images/q{i}-{j}.pgm"
            fill = 255 if j == correct[i] else 0
            write_pgm_bytes(root / rel, 2, 2, [fill] * 4)
            paths.append(rel)
        lines.append(
            json.dumps(
                {"id": f"q{i}", "candidate_images": paths, "correct_index": correct[i]}
            )
        )
    (root / "manifest.jsonl").write_text("\n".join(lines) + "\n")


class TestLoadCorpus:
    def test_fields(self, tmp_path):
        write_corpus_dir(tmp_path, [("A", [0, 0, 0, 255]), ("BB2", [255] * 4)])
        corpus = load_corpus(tmp_path)
        assert len(corpus) == 2
        assert corpus.ids == ("c0", "c1")
        assert corpus.programs == ("A", "BB2")
        assert corpus.images.shape == (2, 1, 2, 2)
        assert corpus.images[1].sum().item() == 4.0

    def test_rejects_wrong_kind(self, tmp_path):
        write_question_dir(tmp_path, 1, [0])
        with pytest.raises(ValueError, match="corpus"):
            load_corpus(tmp_path)

    def test_rejects_wrong_version(self, tmp_path):
        write_corpus_dir(tmp_path, [("A", [0] * 4)])
        manifest = tmp_path / "manifest.jsonl"
        lines = manifest.read_text().splitlines()
        lines[0] = json.dumps({"kind": "corpus", "format_version": 99})
        manifest.write_text("\n".join(lines) + "\n")
        with pytest.raises(ValueError, match="format version"):
            load_corpus(tmp_path)


class TestLoadQuestions:
    def test_shapes_and_targets(self, tmp_path):
        correct = [2, 0, 3]
        write_question_dir(tmp_path, 3, correct)
        questions = load_questions(tmp_path)
        assert len(questions) == 3
        assert questions.candidates.shape == (3, 4, 1, 2, 2)
        assert questions.correct.tolist() == correct
        # the target property must pick exactly the correct candidate
        for i, c in enumerate(correct):
            assert torch.equal(questions.targets[i], questions.candidates[i, c])
            assert questions.targets[i].sum().item() == 4.0  # the white one

    def test_rejects_corpus_manifest(self, tmp_path):
        write_corpus_dir(tmp_path, [("A", [0] * 4)])
        with pytest.raises(ValueError, match="manifest"):
            load_questions(tmp_path)


class TestDatasetDigest:
    def test_stable_and_sensitive(self, tmp_path):
        write_corpus_dir(tmp_path, [("A", [0] * 4)])
        first = dataset_digest(tmp_path)
        assert len(first) == 16 and int(first, 16) >= 0
        assert dataset_digest(tmp_path) == first
        with (tmp_path / "manifest.jsonl").open("a") as fh:
            fh.write("\n")
        assert dataset_digest(tmp_path) != first
