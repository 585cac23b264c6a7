"""Reference agents for the harness.

The oracle pair is a calibration ceiling, not a benchmark entry: the speaker
looks the target up in a ground-truth answer key by image digest, which no
compliant participant could do. The random listener is the chance floor.
"""

from __future__ import annotations

import random
from typing import Iterable, Sequence

from .generate import Question
from .lang import ParseError, canonicalize, parse_program
from .render import (
    DEFAULT_CONFIG,
    Image,
    LayoutCapacityError,
    RenderConfig,
    image_digest,
    render,
)

ALPHABET = "ABC012+*"


def truncate_message(text: str, limit: int = 8) -> str:
    """Lossy fallback: drop trailing '+' commands until the string fits."""
    while len(text) > limit and "+" in text:
        text = text.rsplit("+", 1)[0]
    return text[:limit]


def answer_key(questions: Iterable[Question]) -> dict[int, str]:
    return {
        image_digest(q.target_image): canonicalize(q.target)
        for q in questions
    }


class OracleSpeaker:
    """Emits the target's canonical program, recovered from an answer key."""

    def __init__(self, key: dict[int, str]):
        self.key = key

    def speak(self, trial_id: str, target: Image) -> str:
        text = self.key[image_digest(target)]
        return truncate_message(text)


class OracleListener:
    """Parses the message, renders it and matches candidates by digest."""

    def __init__(self, config: RenderConfig = DEFAULT_CONFIG):
        self.config = config

    def choose(self, trial_id: str, message: str, candidates: Sequence[Image]) -> int:
        try:
            digest = image_digest(render(message, self.config))
        except (ParseError, LayoutCapacityError):
            return 0
        for i, candidate in enumerate(candidates):
            if image_digest(candidate) == digest:
                return i
        return 0


class RandomListener:
    def __init__(self, rng: random.Random | None = None):
        self.rng = rng or random.Random()

    def choose(self, trial_id: str, message: str, candidates: Sequence[Image]) -> int:
        return self.rng.randrange(len(candidates))


class RandomSpeaker:
    """Utters a random admissible message; useful for floor measurements."""

    def __init__(self, rng: random.Random | None = None):
        self.rng = rng or random.Random()

    def speak(self, trial_id: str, target: Image) -> str:
        length = self.rng.randint(1, 8)
        return "".join(self.rng.choice(ALPHABET) for _ in range(length))
