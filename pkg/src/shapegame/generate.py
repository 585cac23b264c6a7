"""Procedural question generation.

Programs are sampled from a token-level Markov walk (shape, number, star,
plus, end) and kept only when the canonical string fits the message budget
and the phase vocabulary. Each question pairs a target image with three
rendered distractors; distractor search prefers hard negatives that share
the target's dominant shape or its glyph total.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field

from .lang import (
    DOUBLE_SHAPES,
    SHAPE_IDS,
    SINGLE_SHAPES,
    Form,
    LayoutCommand,
    Program,
    canonicalize,
    total_glyphs,
)
from .render import DEFAULT_CONFIG, Image, RenderConfig, image_digest, render_program

MESSAGE_BUDGET = 8
SAMPLE_ATTEMPTS = 10_000
DISTRACTOR_ATTEMPTS = 300


class GenerationError(RuntimeError):
    """Raised when rejection sampling exhausts its attempt budget."""


class Phase(enum.Enum):
    PRECONDITIONING = "preconditioning"
    PRACTICE = "practice"
    TEST = "test"


# Walk states. START opens the walk, END closes it; the other four mirror
# the token kinds.
SHAPE, NUMBER, STAR, PLUS, START, END = (
    "shape", "number", "star", "plus", "start", "end",
)


def _default_transitions() -> dict[str, dict[str, float]]:
    return {
        START: {SHAPE: 1.0},
        SHAPE: {NUMBER: 0.35, STAR: 0.25, PLUS: 0.15, END: 0.25},
        NUMBER: {STAR: 0.30, PLUS: 0.20, END: 0.50},
        STAR: {NUMBER: 1.0},
        PLUS: {SHAPE: 1.0},
    }


def _default_shape_weights() -> dict[str, float]:
    # Single-letter shapes are emitted twice as often as two-letter ones.
    weights = {s: 2.0 for s in SINGLE_SHAPES}
    weights.update({s: 1.0 for s in DOUBLE_SHAPES})
    return weights


@dataclass(frozen=True)
class MarkovModel:
    transitions: dict[str, dict[str, float]] = field(
        default_factory=_default_transitions
    )
    shape_weights: dict[str, float] = field(default_factory=_default_shape_weights)
    digit_weights: dict[str, float] = field(
        default_factory=lambda: {"0": 1.0, "1": 1.0, "2": 1.0}
    )
    number_length_weights: dict[int, float] = field(
        default_factory=lambda: {1: 0.5, 2: 0.5}
    )

    def __post_init__(self):
        allowed = {
            START: {SHAPE},
            SHAPE: {NUMBER, STAR, PLUS, END},
            NUMBER: {STAR, PLUS, END},
            STAR: {NUMBER},
            PLUS: {SHAPE},
        }
        for state, row in self.transitions.items():
            if state not in allowed:
                raise ValueError(f"unknown state {state!r}")
            if set(row) - allowed[state]:
                raise ValueError(f"illegal successor for {state!r}")
            if abs(sum(row.values()) - 1.0) > 1e-9:
                raise ValueError(f"transition weights from {state!r} must sum to 1")
        for name, dist in (
            ("shape", self.shape_weights),
            ("digit", self.digit_weights),
            ("number length", self.number_length_weights),
        ):
            if not dist or min(dist.values()) < 0 or sum(dist.values()) <= 0:
                raise ValueError(f"bad {name} weights")


DEFAULT_MODEL = MarkovModel()


@dataclass(frozen=True)
class PhaseVocabulary:
    shapes: tuple[str, ...]
    max_count: int
    max_total: int

    def __post_init__(self):
        if not self.shapes or set(self.shapes) - set(SHAPE_IDS):
            raise ValueError("vocabulary shapes must be a nonempty subset")
        if tuple(sorted(set(self.shapes))) != self.shapes:
            raise ValueError("vocabulary shapes must be sorted and unique")
        if not 1 <= self.max_count <= 8:
            raise ValueError("max_count out of range")
        if self.max_total < 1:
            raise ValueError("max_total out of range")


def vocabulary(shapes: tuple[str, ...] | list[str], max_count: int, max_total: int) -> PhaseVocabulary:
    return PhaseVocabulary(tuple(sorted(set(shapes))), max_count, max_total)


PRECONDITIONING_VOCAB = vocabulary(["A", "B", "C", "AA", "BB"], 4, 16)
PRACTICE_VOCAB = vocabulary(["A", "B", "C", "AA", "BB", "AB", "BA", "CC"], 6, 36)
TEST_VOCAB = vocabulary(list(SHAPE_IDS), 8, 64)


def _weighted(rng: random.Random, dist: dict) -> object:
    keys = list(dist)
    return rng.choices(keys, weights=[dist[k] for k in keys])[0]


def _emit_number(rng: random.Random, model: MarkovModel) -> int:
    length = _weighted(rng, model.number_length_weights)
    digits = "".join(_weighted(rng, model.digit_weights) for _ in range(length))
    return int(digits, 3)


def _reduce(shape: str, rows: int, cols: int, form: Form) -> LayoutCommand:
    # Collapse degenerate arrangements so that visually identical programs
    # share one canonical spelling (a 1xN grid is a row, a 1x1 row a single).
    if rows == 1 and cols == 1:
        form = Form.SINGLE
    elif form is Form.GRID and rows == 1:
        form = Form.ROW
    elif form is Form.GRID and cols == 1:
        form = Form.COLUMN
    return LayoutCommand(shape, form, rows, cols)


def _walk(rng: random.Random, model: MarkovModel) -> list[LayoutCommand] | None:
    """One Markov walk; None when a sampled count falls outside 1..8."""
    commands: list[LayoutCommand] = []
    while True:
        shape = _weighted(rng, model.shape_weights)
        rows = cols = 1
        form = Form.SINGLE
        nxt = _weighted(rng, model.transitions[SHAPE])
        if nxt == NUMBER:
            rows = _emit_number(rng, model)
            form = Form.COLUMN
            nxt = _weighted(rng, model.transitions[NUMBER])
            if nxt == STAR:
                cols = _emit_number(rng, model)
                form = Form.GRID
                nxt = _after_second_number(rng, model)
        elif nxt == STAR:
            cols = _emit_number(rng, model)
            form = Form.ROW
            nxt = _after_second_number(rng, model)
        if not (1 <= rows <= 8 and 1 <= cols <= 8):
            return None
        commands.append(_reduce(shape, rows, cols, form))
        if nxt == END:
            return commands


def _after_second_number(rng: random.Random, model: MarkovModel) -> str:
    # A number that closes a star arm can only be followed by '+' or the end;
    # renormalize the number-state weights over those two successors.
    row = model.transitions[NUMBER]
    dist = {k: v for k, v in row.items() if k in (PLUS, END)}
    if not dist:
        return END
    return _weighted(rng, dist)


def sample_program(
    rng: random.Random,
    vocab: PhaseVocabulary,
    model: MarkovModel = DEFAULT_MODEL,
    attempts: int = SAMPLE_ATTEMPTS,
) -> Program:
    """Rejection-sample one canonical program that fits the vocabulary."""
    for _ in range(attempts):
        commands = _walk(rng, model)
        if commands is None:
            continue
        if any(cmd.shape not in vocab.shapes for cmd in commands):
            continue
        if any(
            cmd.rows > vocab.max_count or cmd.cols > vocab.max_count
            for cmd in commands
        ):
            continue
        program = Program(tuple(commands), "")
        if total_glyphs(program) > vocab.max_total:
            continue
        text = canonicalize(program)
        if len(text) > MESSAGE_BUDGET:
            continue
        return Program(program.commands, text)
    raise GenerationError(f"no admissible program after {attempts} attempts")


@dataclass(frozen=True)
class OODTags:
    novel_symbol: bool
    novel_number: bool

    @property
    def category(self) -> str:
        if self.novel_symbol and self.novel_number:
            return "both"
        if self.novel_symbol:
            return "symbol"
        if self.novel_number:
            return "number"
        return "none"


CATEGORIES = ("none", "symbol", "number", "both")


def tag_ood(program: Program, reference: PhaseVocabulary) -> OODTags:
    """Tag a program against the vocabulary of the previous phase."""
    novel_symbol = any(cmd.shape not in reference.shapes for cmd in program.commands)
    novel_number = any(
        cmd.rows > reference.max_count or cmd.cols > reference.max_count
        for cmd in program.commands
    )
    return OODTags(novel_symbol, novel_number)


@dataclass(frozen=True)
class Question:
    id: str
    phase: Phase
    target: Program
    candidates: tuple[Image, Image, Image, Image]
    correct_index: int
    tags: OODTags

    def __post_init__(self):
        if not 0 <= self.correct_index <= 3:
            raise ValueError("correct_index out of range")

    @property
    def target_image(self) -> Image:
        return self.candidates[self.correct_index]


def dominant_shape(program: Program) -> str:
    """Shape with the most glyphs; earliest command wins ties."""
    totals: dict[str, int] = {}
    for cmd in program.commands:
        totals[cmd.shape] = totals.get(cmd.shape, 0) + cmd.glyphs
    return max(totals, key=totals.get)


def _sample_distractor(
    rng: random.Random,
    vocab: PhaseVocabulary,
    model: MarkovModel,
    config: RenderConfig,
    taken: set[int],
    accept,
) -> tuple[Program, Image, int] | None:
    for _ in range(DISTRACTOR_ATTEMPTS):
        candidate = sample_program(rng, vocab, model)
        if accept is not None and not accept(candidate):
            continue
        img = render_program(candidate, config)
        digest = image_digest(img)
        if digest in taken:
            continue
        return candidate, img, digest
    return None


def plan_distractors(
    rng: random.Random,
    target: Program,
    vocab: PhaseVocabulary,
    model: MarkovModel = DEFAULT_MODEL,
    config: RenderConfig = DEFAULT_CONFIG,
    hard_negatives: bool = True,
) -> list[tuple[Program, Image]]:
    """Three distractors, digest-distinct from the target and each other.

    With hard negatives on, the first slot prefers a program sharing the
    target's dominant shape and the second one sharing its glyph total; both
    fall back to unconstrained sampling when the pool runs dry.
    """
    target_image = render_program(target, config)
    taken = {image_digest(target_image)}
    want_shape = dominant_shape(target)
    want_total = total_glyphs(target)
    plans = []
    if hard_negatives:
        plans = [
            lambda p: dominant_shape(p) == want_shape,
            lambda p: total_glyphs(p) == want_total,
        ]
    plans.append(None)
    out: list[tuple[Program, Image]] = []
    for accept in plans:
        found = _sample_distractor(rng, vocab, model, config, taken, accept)
        if found is None and accept is not None:
            found = _sample_distractor(rng, vocab, model, config, taken, None)
        if found is None:
            raise GenerationError("distractor pool exhausted")
        program, img, digest = found
        taken.add(digest)
        out.append((program, img))
    return out


def make_question(
    rng: random.Random,
    target: Program,
    vocab: PhaseVocabulary,
    reference: PhaseVocabulary,
    phase: Phase,
    qid: str = "",
    model: MarkovModel = DEFAULT_MODEL,
    config: RenderConfig = DEFAULT_CONFIG,
    hard_negatives: bool = True,
) -> Question:
    """Build one four-way question around a target program."""
    target_image = render_program(target, config)
    distractors = plan_distractors(rng, target, vocab, model, config, hard_negatives)
    entries = [(target_image, True)] + [(img, False) for _, img in distractors]
    rng.shuffle(entries)
    images = tuple(img for img, _ in entries)
    correct_index = next(i for i, (_, is_target) in enumerate(entries) if is_target)
    return Question(
        qid, phase, target, images, correct_index, tag_ood(target, reference)
    )


@dataclass(frozen=True)
class PhaseSpec:
    phase: Phase
    vocab: PhaseVocabulary
    reference: PhaseVocabulary
    n_questions: int
    seed: int
    curriculum: bool = True

    def __post_init__(self):
        if self.n_questions < 1:
            raise ValueError("n_questions must be positive")


def _child_rng(seed: int, phase: Phase, index: int) -> random.Random:
    # String seeding is stable across platforms and runs.
    return random.Random(f"{seed}/{phase.value}/{index}")


def _satisfiable(category: str, vocab: PhaseVocabulary, ref: PhaseVocabulary) -> bool:
    has_symbol = bool(set(vocab.shapes) - set(ref.shapes))
    has_number = vocab.max_count > ref.max_count
    return {
        "none": True,
        "symbol": has_symbol,
        "number": has_number,
        "both": has_symbol and has_number,
    }[category]


def _sample_in_category(
    rng: random.Random,
    category: str,
    vocab: PhaseVocabulary,
    ref: PhaseVocabulary,
    model: MarkovModel,
) -> Program:
    for _ in range(SAMPLE_ATTEMPTS):
        program = sample_program(rng, vocab, model)
        if tag_ood(program, ref).category == category:
            return program
    raise GenerationError(f"cannot sample a {category!r} question")


CURRICULUM_RANK = {"none": 0, "symbol": 1, "number": 2, "both": 3}


def build_phase_set(
    spec: PhaseSpec,
    model: MarkovModel = DEFAULT_MODEL,
    config: RenderConfig = DEFAULT_CONFIG,
) -> list[Question]:
    """Deterministically build one phase's question list.

    Every satisfiable out-of-distribution category is guaranteed at least one
    question (late slots are steered toward missing categories). Curriculum
    ordering then presents in-distribution items first, one novel attribute
    at a time, and doubly novel items last.
    """
    wanted = [c for c in CATEGORIES if _satisfiable(c, spec.vocab, spec.reference)]
    questions: list[Question] = []
    seen: set[str] = set()
    for i in range(spec.n_questions):
        rng = _child_rng(spec.seed, spec.phase, i)
        missing = [c for c in wanted if c not in seen]
        slots_left = spec.n_questions - i
        if missing and slots_left <= len(missing):
            target = _sample_in_category(
                rng, missing[0], spec.vocab, spec.reference, model
            )
        else:
            target = sample_program(rng, spec.vocab, model)
        question = make_question(
            rng, target, spec.vocab, spec.reference, spec.phase, model=model,
            config=config,
        )
        seen.add(question.tags.category)
        questions.append(question)
    if spec.curriculum:
        questions.sort(key=lambda q: CURRICULUM_RANK[q.tags.category])
    return [
        Question(
            f"{spec.phase.value}-{i:04d}", q.phase, q.target, q.candidates,
            q.correct_index, q.tags,
        )
        for i, q in enumerate(questions)
    ]


def sample_corpus(
    vocab: PhaseVocabulary,
    count: int,
    seed: int,
    model: MarkovModel = DEFAULT_MODEL,
    config: RenderConfig = DEFAULT_CONFIG,
) -> list[tuple[str, Program, Image]]:
    """Unsupervised image corpus for pretraining; ids follow sample order."""
    out = []
    for i in range(count):
        rng = _child_rng(seed, Phase.PRECONDITIONING, i)
        program = sample_program(rng, vocab, model)
        out.append((f"corpus-{i:05d}", program, render_program(program, config)))
    return out
