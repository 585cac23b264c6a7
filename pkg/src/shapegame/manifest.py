"""Byte-reproducible dataset files.

A dataset directory holds `manifest.jsonl` plus an `images/` tree of golden
PGMs. The manifest's first line is a header object; every following line is
one question row. Keys are sorted and lines end with `\\n`, so regenerating
with the same config and seed reproduces the files byte for byte. Image
digests are recorded per candidate and re-checked on read.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .engine import TrialRecord
from .generate import OODTags, Phase, PhaseSpec, Question
from .imgio import read_pgm, write_pgm
from .lang import Program, parse_program
from .render import Image, image_digest

FORMAT_VERSION = 1
OOD_CONVENTION = "disjoint"


class ManifestError(ValueError):
    pass


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def spec_digest(spec: PhaseSpec) -> str:
    payload = _dumps(
        {
            "phase": spec.phase.value,
            "vocab": [list(spec.vocab.shapes), spec.vocab.max_count, spec.vocab.max_total],
            "reference": [
                list(spec.reference.shapes),
                spec.reference.max_count,
                spec.reference.max_total,
            ],
            "n_questions": spec.n_questions,
            "seed": spec.seed,
            "curriculum": spec.curriculum,
        }
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class ManifestRow:
    id: str
    phase: str
    program: str
    novel_symbol: bool
    novel_number: bool
    correct_index: int
    target_image: str
    candidate_images: tuple[str, str, str, str]
    candidate_digests: tuple[str, str, str, str]


@dataclass(frozen=True)
class Manifest:
    header: dict
    rows: tuple[ManifestRow, ...]
    root: Path


def write_manifest(questions: Sequence[Question], out_dir: str | Path,
                   spec: PhaseSpec) -> Path:
    root = Path(out_dir)
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    counts = {"none": 0, "symbol": 0, "number": 0, "both": 0}
    lines = []
    for q in questions:
        counts[q.tags.category] += 1
        paths = []
        digests = []
        for j, img in enumerate(q.candidates):
            rel = f"images/{q.id}_c{j}.pgm"
            write_pgm(img, root / rel)
            paths.append(rel)
            digests.append(f"{image_digest(img):016x}")
        lines.append(
            _dumps(
                {
                    "id": q.id,
                    "phase": q.phase.value,
                    "program": q.target.source,
                    "novel_symbol": q.tags.novel_symbol,
                    "novel_number": q.tags.novel_number,
                    "correct_index": q.correct_index,
                    "target_image": paths[q.correct_index],
                    "candidate_images": paths,
                    "candidate_digests": digests,
                }
            )
        )
    header = _dumps(
        {
            "kind": "manifest",
            "format_version": FORMAT_VERSION,
            "phase": spec.phase.value,
            "seed": spec.seed,
            "n_questions": len(questions),
            "spec_digest": spec_digest(spec),
            "ood_columns": OOD_CONVENTION,
            "category_counts": counts,
        }
    )
    path = root / "manifest.jsonl"
    path.write_text("\n".join([header] + lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path: str | Path, verify: bool = True) -> Manifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    root = path.parent
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ManifestError(f"empty manifest: {path}")
    header = json.loads(lines[0])
    if header.get("kind") != "manifest":
        raise ManifestError(f"not a question manifest: {path}")
    if header.get("format_version") != FORMAT_VERSION:
        raise ManifestError(
            f"unsupported format version {header.get('format_version')!r}"
        )
    rows = []
    for line in lines[1:]:
        raw = json.loads(line)
        rows.append(
            ManifestRow(
                raw["id"], raw["phase"], raw["program"], raw["novel_symbol"],
                raw["novel_number"], raw["correct_index"], raw["target_image"],
                tuple(raw["candidate_images"]), tuple(raw["candidate_digests"]),
            )
        )
    manifest = Manifest(header, tuple(rows), root)
    if verify:
        verify_manifest(manifest)
    return manifest


def verify_manifest(manifest: Manifest) -> None:
    for row in manifest.rows:
        parse_program(row.program)
        if row.target_image != row.candidate_images[row.correct_index]:
            raise ManifestError(f"{row.id}: target image mismatch")
        for rel, digest in zip(row.candidate_images, row.candidate_digests):
            file = manifest.root / rel
            if not file.exists():
                raise ManifestError(f"{row.id}: missing image {rel}")
            actual = image_digest(read_pgm(file))
            if f"{actual:016x}" != digest:
                raise ManifestError(f"{row.id}: digest mismatch for {rel}")


def load_questions(manifest: Manifest) -> list[Question]:
    questions = []
    for row in manifest.rows:
        candidates = tuple(
            read_pgm(manifest.root / rel) for rel in row.candidate_images
        )
        questions.append(
            Question(
                row.id,
                Phase(row.phase),
                parse_program(row.program),
                candidates,
                row.correct_index,
                OODTags(row.novel_symbol, row.novel_number),
            )
        )
    return questions


def records_text(records: Iterable[TrialRecord]) -> str:
    lines = []
    for r in records:
        lines.append(
            _dumps(
                {
                    "question_id": r.question_id,
                    "phase": r.phase.value,
                    "message": r.message,
                    "chosen": r.chosen,
                    "correct": r.correct,
                    "novel_symbol": r.tags.novel_symbol,
                    "novel_number": r.tags.novel_number,
                    "note": r.note,
                }
            )
        )
    return "\n".join(lines) + "\n"


def write_records(records: Iterable[TrialRecord], path: str | Path) -> Path:
    path = Path(path)
    path.write_text(records_text(records), encoding="utf-8")
    return path


def read_records(path: str | Path) -> list[TrialRecord]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        raw = json.loads(line)
        records.append(
            TrialRecord(
                raw["question_id"], Phase(raw["phase"]), raw["message"],
                raw["chosen"], raw["correct"],
                OODTags(raw["novel_symbol"], raw["novel_number"]), raw["note"],
            )
        )
    return records


def write_corpus(
    samples: Sequence[tuple[str, Program, Image]],
    out_dir: str | Path,
    seed: int,
) -> Path:
    root = Path(out_dir)
    images = root / "images"
    images.mkdir(parents=True, exist_ok=True)
    lines = [
        _dumps(
            {
                "kind": "corpus",
                "format_version": FORMAT_VERSION,
                "seed": seed,
                "count": len(samples),
            }
        )
    ]
    for sid, program, img in samples:
        rel = f"images/{sid}.pgm"
        write_pgm(img, root / rel)
        lines.append(
            _dumps(
                {
                    "id": sid,
                    "program": program.source,
                    "image": rel,
                    "digest": f"{image_digest(img):016x}",
                }
            )
        )
    path = root / "manifest.jsonl"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_corpus(path: str | Path, verify: bool = True) -> list[tuple[str, str, Image]]:
    """Rows of (id, program, image) from a corpus manifest."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    root = path.parent
    lines = path.read_text(encoding="utf-8").splitlines()
    header = json.loads(lines[0])
    if header.get("kind") != "corpus":
        raise ManifestError(f"not a corpus manifest: {path}")
    if header.get("format_version") != FORMAT_VERSION:
        raise ManifestError("unsupported format version")
    out = []
    for line in lines[1:]:
        raw = json.loads(line)
        img = read_pgm(root / raw["image"])
        if verify and f"{image_digest(img):016x}" != raw["digest"]:
            raise ManifestError(f"{raw['id']}: digest mismatch")
        out.append((raw["id"], raw["program"], img))
    return out
