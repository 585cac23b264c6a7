"""Run configuration.

Configs are plain INI key/value files (configparser syntax). Every key has a
default, so an empty file or no file at all is a full configuration. See
`dump_config` for a template listing everything that can be overridden.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path

from .generate import (
    MarkovModel,
    Phase,
    PhaseVocabulary,
    PRECONDITIONING_VOCAB,
    PRACTICE_VOCAB,
    TEST_VOCAB,
    vocabulary,
)
from .render import CELL_LADDER, GUTTER, ImageShape, RenderConfig

DEFAULT_PORT = 8080
PORT_ENV_VAR = "MTT_PORT"


@dataclass(frozen=True)
class RunConfig:
    render: RenderConfig = RenderConfig()
    model: MarkovModel = MarkovModel()
    vocabs: dict[Phase, PhaseVocabulary] = field(
        default_factory=lambda: {
            Phase.PRECONDITIONING: PRECONDITIONING_VOCAB,
            Phase.PRACTICE: PRACTICE_VOCAB,
            Phase.TEST: TEST_VOCAB,
        }
    )
    practice_questions: int = 100
    test_questions: int = 100
    corpus_size: int = 5000
    curriculum: bool = True
    agent_timeout: float = 30.0
    gallery_size: int = 20

    def reference_for(self, phase: Phase) -> PhaseVocabulary:
        """OOD reference: the vocabulary of the preceding phase."""
        if phase is Phase.TEST:
            return self.vocabs[Phase.PRACTICE]
        return self.vocabs[Phase.PRECONDITIONING]


def default_config() -> RunConfig:
    return RunConfig()


def _vocab_from_section(section) -> PhaseVocabulary:
    shapes = [s.strip() for s in section["shapes"].split(",") if s.strip()]
    return vocabulary(
        shapes, section.getint("max_count"), section.getint("max_total")
    )


def load_config(path: str | Path | None) -> RunConfig:
    base = default_config()
    if path is None:
        return base
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    render = base.render
    if parser.has_section("render"):
        s = parser["render"]
        side = s.getint("side", render.image_shape.height)
        ladder = tuple(
            int(x) for x in s.get("cell_ladder", ",".join(map(str, CELL_LADDER))).split(",")
        )
        render = RenderConfig(
            ImageShape(side, side), render.atlas, s.getint("gutter", GUTTER), ladder
        )
    model = base.model
    if parser.has_section("markov"):
        s = parser["markov"]
        transitions = {
            "start": {"shape": 1.0},
            "shape": {
                "number": s.getfloat("shape_to_number", 0.35),
                "star": s.getfloat("shape_to_star", 0.25),
                "plus": s.getfloat("shape_to_plus", 0.15),
                "end": s.getfloat("shape_to_end", 0.25),
            },
            "number": {
                "star": s.getfloat("number_to_star", 0.30),
                "plus": s.getfloat("number_to_plus", 0.20),
                "end": s.getfloat("number_to_end", 0.50),
            },
            "star": {"number": 1.0},
            "plus": {"shape": 1.0},
        }
        single = s.getfloat("single_letter_weight", 2.0)
        double = s.getfloat("double_letter_weight", 1.0)
        shape_weights = {sh: (single if len(sh) == 1 else double)
                         for sh in base.model.shape_weights}
        model = MarkovModel(transitions=transitions, shape_weights=shape_weights)
    vocabs = dict(base.vocabs)
    for phase in Phase:
        name = f"vocab.{phase.value}"
        if parser.has_section(name):
            vocabs[phase] = _vocab_from_section(parser[name])
    sizes = parser["phases"] if parser.has_section("phases") else {}
    game = parser["game"] if parser.has_section("game") else {}
    service = parser["service"] if parser.has_section("service") else {}

    def _get(section, key, fallback, cast):
        if not section or key not in section:
            return fallback
        return cast(section.get(key))

    return RunConfig(
        render=render,
        model=model,
        vocabs=vocabs,
        practice_questions=_get(sizes, "practice_questions", base.practice_questions, int),
        test_questions=_get(sizes, "test_questions", base.test_questions, int),
        corpus_size=_get(sizes, "corpus_size", base.corpus_size, int),
        curriculum=_get(sizes, "curriculum", base.curriculum,
                        lambda v: v.lower() in ("1", "true", "yes")),
        agent_timeout=_get(game, "agent_timeout", base.agent_timeout, float),
        gallery_size=_get(service, "gallery_size", base.gallery_size, int),
    )


def apply_preset(config: RunConfig, preset: str) -> RunConfig:
    """Named presets: 'model-100/100' (default sizes) or 'human-10/10'."""
    name = preset.split("-")[0]
    if name == "model":
        sizes = (100, 100)
    elif name == "human":
        sizes = (10, 10)
    else:
        raise ValueError(f"unknown preset {preset!r}")
    return RunConfig(
        render=config.render,
        model=config.model,
        vocabs=config.vocabs,
        practice_questions=sizes[0],
        test_questions=sizes[1],
        corpus_size=config.corpus_size,
        curriculum=config.curriculum,
        agent_timeout=config.agent_timeout,
        gallery_size=config.gallery_size,
    )


def dump_config(config: RunConfig) -> str:
    """Render a config back to INI text (a template of every known key)."""
    parser = configparser.ConfigParser()
    parser["render"] = {
        "side": str(config.render.image_shape.height),
        "gutter": str(config.render.gutter),
        "cell_ladder": ",".join(map(str, config.render.cell_ladder)),
    }
    shape_row = config.model.transitions["shape"]
    number_row = config.model.transitions["number"]
    parser["markov"] = {
        "shape_to_number": str(shape_row["number"]),
        "shape_to_star": str(shape_row["star"]),
        "shape_to_plus": str(shape_row["plus"]),
        "shape_to_end": str(shape_row["end"]),
        "number_to_star": str(number_row["star"]),
        "number_to_plus": str(number_row["plus"]),
        "number_to_end": str(number_row["end"]),
        "single_letter_weight": str(config.model.shape_weights["A"]),
        "double_letter_weight": str(config.model.shape_weights["AA"]),
    }
    for phase, vocab in config.vocabs.items():
        parser[f"vocab.{phase.value}"] = {
            "shapes": ",".join(vocab.shapes),
            "max_count": str(vocab.max_count),
            "max_total": str(vocab.max_total),
        }
    parser["phases"] = {
        "practice_questions": str(config.practice_questions),
        "test_questions": str(config.test_questions),
        "corpus_size": str(config.corpus_size),
        "curriculum": str(config.curriculum).lower(),
    }
    parser["game"] = {"agent_timeout": str(config.agent_timeout)}
    parser["service"] = {"gallery_size": str(config.gallery_size)}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()
