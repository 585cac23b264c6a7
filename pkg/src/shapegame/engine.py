"""Two-player referential game harness.

A trial shows the speaker the target image only; the listener sees the
speaker's message and the four candidate images only. Neither side ever
receives the other's private view, and the harness is the only component
that knows the correct index. Practice trials deliver feedback after each
selection; test trials never do.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence

from .generate import CATEGORIES, OODTags, Phase, Question
from .render import Image

ALPHABET = "ABC012+*"
MAX_MESSAGE = 8


def validate_message(text: str) -> str | None:
    """None when the message is admissible, otherwise a violation description."""
    if not isinstance(text, str) or not text:
        return "empty message"
    if len(text) > MAX_MESSAGE:
        return f"length {len(text)} > {MAX_MESSAGE}"
    for ch in text:
        if ch == " ":
            return "space character"
        if ch not in ALPHABET:
            return f"character {ch!r} outside alphabet"
    return None


class Speaker(Protocol):
    def speak(self, trial_id: str, target: Image) -> str: ...


class Listener(Protocol):
    def choose(self, trial_id: str, message: str, candidates: Sequence[Image]) -> int: ...


@dataclass
class AgentEndpoints:
    speaker: Speaker
    listener: Listener


@dataclass(frozen=True)
class TrialRecord:
    question_id: str
    phase: Phase
    message: str | None
    chosen: int | None
    correct: bool
    tags: OODTags
    note: str | None = None


def _deliver_feedback(agents: AgentEndpoints, record: TrialRecord, correct_index: int) -> None:
    for endpoint in (agents.speaker, agents.listener):
        hook = getattr(endpoint, "feedback", None)
        if hook is not None:
            hook(record, correct_index)


def run_trial(
    agents: AgentEndpoints, question: Question, feedback: bool
) -> TrialRecord:
    """Run one trial. Agent exceptions and protocol violations consume the
    trial as incorrect; they never abort the phase."""
    tags = question.tags
    qid = question.id
    try:
        message = agents.speaker.speak(qid, question.target_image)
    except Exception as exc:
        record = TrialRecord(qid, question.phase, None, None, False, tags,
                            f"speaker failure: {exc}")
        if feedback:
            _deliver_feedback(agents, record, question.correct_index)
        return record
    violation = validate_message(message)
    if violation is not None:
        record = TrialRecord(qid, question.phase, None, None, False, tags,
                            f"invalid message: {violation}")
        if feedback:
            _deliver_feedback(agents, record, question.correct_index)
        return record
    try:
        chosen = agents.listener.choose(qid, message, question.candidates)
    except Exception as exc:
        record = TrialRecord(qid, question.phase, message, None, False, tags,
                            f"listener failure: {exc}")
        if feedback:
            _deliver_feedback(agents, record, question.correct_index)
        return record
    if not isinstance(chosen, int) or not 0 <= chosen <= 3:
        record = TrialRecord(qid, question.phase, message, None, False, tags,
                            f"listener choice out of range: {chosen!r}")
        if feedback:
            _deliver_feedback(agents, record, question.correct_index)
        return record
    record = TrialRecord(
        qid, question.phase, message, chosen,
        chosen == question.correct_index, tags,
    )
    if feedback:
        _deliver_feedback(agents, record, question.correct_index)
    return record


def run_phase(
    agents: AgentEndpoints, questions: Sequence[Question], phase: Phase
) -> list[TrialRecord]:
    """Single sequential pass; feedback flows in practice only."""
    if not questions:
        raise ValueError("phase has no questions")
    feedback = phase is Phase.PRACTICE
    return [run_trial(agents, q, feedback) for q in questions]


@dataclass(frozen=True)
class CategoryScore:
    correct: int
    total: int

    @property
    def accuracy(self) -> float | None:
        return self.correct / self.total if self.total else None


@dataclass(frozen=True)
class AccuracyBreakdown:
    overall: CategoryScore
    ood_symbol: CategoryScore
    ood_number: CategoryScore
    ood_both: CategoryScore

    @property
    def in_distribution(self) -> CategoryScore:
        return CategoryScore(
            self.overall.correct
            - self.ood_symbol.correct
            - self.ood_number.correct
            - self.ood_both.correct,
            self.overall.total
            - self.ood_symbol.total
            - self.ood_number.total
            - self.ood_both.total,
        )


def score(records: Sequence[TrialRecord]) -> AccuracyBreakdown:
    """Accuracy overall and per disjoint out-of-distribution category."""
    buckets = {c: [0, 0] for c in CATEGORIES}
    overall = [0, 0]
    for record in records:
        overall[1] += 1
        overall[0] += record.correct
        bucket = buckets[record.tags.category]
        bucket[1] += 1
        bucket[0] += record.correct
    return AccuracyBreakdown(
        CategoryScore(*overall),
        CategoryScore(*buckets["symbol"]),
        CategoryScore(*buckets["number"]),
        CategoryScore(*buckets["both"]),
    )


def aggregate(
    scores: Sequence[float], points_per_phase: int | None = None
) -> tuple[float, float]:
    """Mean and sample standard deviation of per-pair phase scores."""
    if len(scores) < 2:
        raise ValueError("aggregate needs at least two scores")
    if points_per_phase is not None:
        for s in scores:
            if not 0 <= s <= points_per_phase:
                raise ValueError(f"score {s} outside 0..{points_per_phase}")
    return statistics.fmean(scores), statistics.stdev(scores)
