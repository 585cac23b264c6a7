"""Referential-game benchmark over a symbolic shape language."""

from .lang import (
    ParseError,
    Program,
    canonicalize,
    encode_trinary,
    parse_program,
    parse_trinary,
    tokenize,
    total_glyphs,
)
from .render import (
    GlyphAtlas,
    Image,
    ImageShape,
    LayoutCapacityError,
    RenderConfig,
    image_digest,
    layout,
    rasterize,
    render,
)
from .generate import (
    GenerationError,
    MarkovModel,
    OODTags,
    Phase,
    PhaseSpec,
    PhaseVocabulary,
    Question,
    build_phase_set,
    make_question,
    sample_program,
    tag_ood,
)
from .engine import (
    AccuracyBreakdown,
    AgentEndpoints,
    TrialRecord,
    aggregate,
    run_phase,
    run_trial,
    score,
    validate_message,
)

__version__ = "0.1.0"
