"""Readers for the benchmark's on-disk formats.

This package talks to the game environment only through its published
artifacts — PGM images, JSONL manifests, and the stdio agent protocol — so
the readers here are deliberately independent reimplementations, not imports
from the environment package.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import torch

FORMAT_VERSION = 1


def read_pgm(path: str | Path) -> torch.Tensor:
    """A binary PGM (P5) as a float tensor [1, H, W] scaled to [0, 1]."""
    blob = Path(path).read_bytes()
    fields: list[bytes] = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos] in b" \t\r\n":
            pos += 1
        if blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < len(blob) and blob[pos] not in b" \t\r\n":
            pos += 1
        fields.append(blob[start:pos])
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    pixels = blob[pos + 1 : pos + 1 + width * height]
    if len(pixels) != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    data = torch.frombuffer(bytearray(pixels), dtype=torch.uint8)
    return data.reshape(1, height, width).float() / maxval


def _read_jsonl(path: Path, kind: str) -> tuple[dict, list[dict]]:
    lines = path.read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    if header.get("kind") != kind:
        raise ValueError(f"{path}: expected a {kind} manifest")
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version")
    return header, [json.loads(line) for line in lines[1:]]


def dataset_digest(directory: str | Path) -> str:
    """Fingerprint of a dataset for checkpoint sidecars."""
    manifest = Path(directory) / "manifest.jsonl"
    return hashlib.sha256(manifest.read_bytes()).hexdigest()[:16]


@dataclass(frozen=True)
class Corpus:
    """A pretraining image corpus: images plus their generating programs."""

    ids: tuple[str, ...]
    programs: tuple[str, ...]
    images: torch.Tensor  # [N, 1, H, W]

    def __len__(self) -> int:
        return len(self.ids)


def load_corpus(directory: str | Path) -> Corpus:
    root = Path(directory)
    _, rows = _read_jsonl(root / "manifest.jsonl", "corpus")
    ids = tuple(row["id"] for row in rows)
    programs = tuple(row["program"] for row in rows)
    images = torch.stack([read_pgm(root / row["image"]) for row in rows])
    return Corpus(ids, programs, images)


@dataclass(frozen=True)
class QuestionSet:
    """Four-way questions: candidate image stacks plus the correct index."""

    ids: tuple[str, ...]
    candidates: torch.Tensor  # [N, 4, 1, H, W]
    correct: torch.Tensor  # [N] long

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def targets(self) -> torch.Tensor:
        index = self.correct.view(-1, 1, 1, 1, 1)
        return self.candidates.gather(
            1, index.expand(-1, 1, *self.candidates.shape[2:])
        ).squeeze(1)


def load_questions(directory: str | Path) -> QuestionSet:
    root = Path(directory)
    _, rows = _read_jsonl(root / "manifest.jsonl", "manifest")
    ids = tuple(row["id"] for row in rows)
    candidates = torch.stack(
        [
            torch.stack([read_pgm(root / rel) for rel in row["candidate_images"]])
            for row in rows
        ]
    )
    correct = torch.tensor([row["correct_index"] for row in rows], dtype=torch.long)
    return QuestionSet(ids, candidates, correct)
