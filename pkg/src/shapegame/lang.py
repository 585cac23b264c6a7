"""Symbolic shape language: trinary numbers, tokenizer, parser, canonical form.

A command string is one or more '+'-separated layout commands over the
8-character alphabet ABC012+*. Each command names a shape and an arrangement:

    SHAPEcc*cc   grid, rows x cols
    SHAPE*cc     row, 1 x cols
    SHAPEcc      column, rows x 1
    SHAPE        single glyph

Counts are trinary digit strings ("11" = 4). Shapes are A, B, C or any
two-letter combination of them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

ALPHABET = "ABC012+*"
LETTERS = "ABC"
DIGITS = "012"

SINGLE_SHAPES = ("A", "B", "C")
DOUBLE_SHAPES = ("AA", "AB", "AC", "BA", "BB", "BC", "CA", "CB", "CC")
SHAPE_IDS = SINGLE_SHAPES + DOUBLE_SHAPES

MAX_COUNT = 8


class ParseError(ValueError):
    """Raised for any lexical or grammatical defect in a command string."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.reason = message
        self.pos = pos


def parse_trinary(digits: str) -> int:
    """Decode a base-3 digit string; leading zeros are tolerated."""
    if not digits:
        raise ValueError("empty digit string")
    value = 0
    for ch in digits:
        if ch not in DIGITS:
            raise ValueError(f"not a trinary digit: {ch!r}")
        value = value * 3 + (ord(ch) - ord("0"))
    return value


def encode_trinary(value: int) -> str:
    """Shortest base-3 encoding; inverse of parse_trinary on canonical strings."""
    if value < 0:
        raise ValueError("negative value")
    if value == 0:
        return "0"
    out = []
    while value:
        out.append(DIGITS[value % 3])
        value //= 3
    return "".join(reversed(out))


class TokenKind(enum.Enum):
    SHAPE = "shape"
    NUMBER = "number"
    STAR = "star"
    PLUS = "plus"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    """Maximal-munch lexer. Letter runs cap at two; three or more is an error."""
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in LETTERS:
            j = i
            while j < n and text[j] in LETTERS:
                j += 1
            if j - i > 2:
                raise ParseError(f"run of {j - i} letters exceeds two", i)
            tokens.append(Token(TokenKind.SHAPE, text[i:j], i))
            i = j
        elif ch in DIGITS:
            j = i
            while j < n and text[j] in DIGITS:
                j += 1
            tokens.append(Token(TokenKind.NUMBER, text[i:j], i))
            i = j
        elif ch == "*":
            tokens.append(Token(TokenKind.STAR, ch, i))
            i += 1
        elif ch == "+":
            tokens.append(Token(TokenKind.PLUS, ch, i))
            i += 1
        elif ch == " ":
            raise ParseError("space character is not allowed", i)
        else:
            raise ParseError(f"character {ch!r} is outside the alphabet", i)
    return tokens


class Form(enum.Enum):
    GRID = "grid"
    ROW = "row"
    COLUMN = "column"
    SINGLE = "single"


@dataclass(frozen=True)
class LayoutCommand:
    shape: str
    form: Form
    rows: int
    cols: int

    def __post_init__(self):
        if self.shape not in SHAPE_IDS:
            raise ValueError(f"unknown shape {self.shape!r}")
        if not (1 <= self.rows <= MAX_COUNT and 1 <= self.cols <= MAX_COUNT):
            raise ValueError(f"counts out of range: {self.rows}x{self.cols}")
        if self.form is Form.SINGLE and (self.rows, self.cols) != (1, 1):
            raise ValueError("single form must be 1x1")
        if self.form is Form.ROW and self.rows != 1:
            raise ValueError("row form must have one row")
        if self.form is Form.COLUMN and self.cols != 1:
            raise ValueError("column form must have one column")

    @property
    def glyphs(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Program:
    commands: tuple[LayoutCommand, ...]
    source: str


def _parse_count(token: Token) -> int:
    value = parse_trinary(token.text)
    if value == 0:
        raise ParseError("count of zero", token.pos)
    if value > MAX_COUNT:
        raise ParseError(f"count {value} exceeds {MAX_COUNT}", token.pos)
    return value


def _parse_segment(tokens: list[Token], start_pos: int) -> LayoutCommand:
    if not tokens:
        raise ParseError("empty command", start_pos)
    kinds = tuple(t.kind for t in tokens)
    K = TokenKind
    if kinds == (K.SHAPE,):
        return LayoutCommand(tokens[0].text, Form.SINGLE, 1, 1)
    if kinds == (K.SHAPE, K.NUMBER):
        return LayoutCommand(tokens[0].text, Form.COLUMN, _parse_count(tokens[1]), 1)
    if kinds == (K.SHAPE, K.STAR, K.NUMBER):
        return LayoutCommand(tokens[0].text, Form.ROW, 1, _parse_count(tokens[2]))
    if kinds == (K.SHAPE, K.NUMBER, K.STAR, K.NUMBER):
        return LayoutCommand(
            tokens[0].text, Form.GRID, _parse_count(tokens[1]), _parse_count(tokens[3])
        )
    raise ParseError("command does not match any primitive", tokens[0].pos)


def parse_program(text: str) -> Program:
    """Parse a command string, or raise ParseError. Never returns partial output."""
    tokens = tokenize(text)
    commands: list[LayoutCommand] = []
    segment: list[Token] = []
    segment_start = 0
    for tok in tokens:
        if tok.kind is TokenKind.PLUS:
            commands.append(_parse_segment(segment, segment_start))
            segment = []
            segment_start = tok.pos + 1
        else:
            segment.append(tok)
    commands.append(_parse_segment(segment, segment_start))
    return Program(tuple(commands), text)


def canonicalize(program: Program) -> str:
    """Shortest syntactic spelling of each command, joined with '+'."""
    parts = []
    for cmd in program.commands:
        if cmd.form is Form.SINGLE:
            parts.append(cmd.shape)
        elif cmd.form is Form.ROW:
            parts.append(f"{cmd.shape}*{encode_trinary(cmd.cols)}")
        elif cmd.form is Form.COLUMN:
            parts.append(f"{cmd.shape}{encode_trinary(cmd.rows)}")
        else:
            parts.append(
                f"{cmd.shape}{encode_trinary(cmd.rows)}*{encode_trinary(cmd.cols)}"
            )
    return "+".join(parts)


def total_glyphs(program: Program) -> int:
    return sum(cmd.glyphs for cmd in program.commands)
