"""Deterministic rasterizer for shape-language programs.

Programs render onto a fixed grayscale canvas (default 40x40, values 0/255).
Each command becomes a vertical strip of glyph cells; strips run left to
right with a 2-pixel gutter. Cells shrink through a fixed ladder (5, 4, 3
pixels) until the scene fits, otherwise the program is rejected as too large.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lang import SHAPE_IDS, Program, parse_program, total_glyphs

INK = 255
FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# Master bitmaps are 4x4, one string per pixel row, '#' for ink. They are
# hand-drawn motifs rather than letter faces: distinctness at a glance
# matters more than typography at this size.
_BITMAPS = {
    "A": ("####", "####", "####", "####"),
    "B": ("####", "#..#", "#..#", "####"),
    "C": ("#..#", ".##.", ".##.", "#..#"),
    "AA": (".##.", "####", "####", ".##."),
    "AB": ("####", "....", "####", "...."),
    "AC": ("#..#", "#..#", "#..#", "#..#"),
    "BA": ("#.#.", ".#.#", "#.#.", ".#.#"),
    "BB": ("#...", ".#..", "..#.", "...#"),
    "BC": ("...#", "..#.", ".#..", "#..."),
    "CA": ("####", ".#..", ".#..", ".#.."),
    "CB": ("#...", "#...", "#...", "####"),
    "CC": ("....", ".##.", ".##.", "...."),
}

MASTER_SIZE = 4
CELL_LADDER = (5, 4, 3)
GUTTER = 2


class LayoutCapacityError(ValueError):
    """Raised when a program cannot fit the canvas at any ladder cell size."""


@dataclass(frozen=True)
class ImageShape:
    height: int = 40
    width: int = 40
    channels: int = 1

    def __post_init__(self):
        if self.channels != 1:
            raise ValueError("images are single-channel")
        if self.height != self.width or self.height not in (40, 80):
            raise ValueError("canvas must be square, 40 or 80 pixels")


@dataclass(frozen=True)
class Image:
    shape: ImageShape
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != self.shape.height * self.shape.width:
            raise ValueError("pixel buffer does not match shape")


def _hamming(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    return sum(
        ra[i] != rb[i] for ra, rb in zip(a, b) for i in range(MASTER_SIZE)
    )


def _shrink(bitmap: tuple[str, ...], size: int) -> tuple[str, ...]:
    """OR-pool the 4x4 master down to size x size (used for the 3-px cell)."""
    if size == MASTER_SIZE:
        return bitmap
    groups = ((0,), (1, 2), (3,)) if size == 3 else None
    if groups is None:
        raise ValueError(f"unsupported ink size {size}")
    rows = []
    for rg in groups:
        row = []
        for cg in groups:
            row.append("#" if any(bitmap[r][c] == "#" for r in rg for c in cg) else ".")
        rows.append("".join(row))
    return tuple(rows)


@dataclass(frozen=True)
class GlyphAtlas:
    bitmaps: dict[str, tuple[str, ...]] = field(
        default_factory=lambda: dict(_BITMAPS)
    )

    def __post_init__(self):
        if set(self.bitmaps) != set(SHAPE_IDS):
            raise ValueError("atlas must define exactly the twelve shapes")
        for shape, bmp in self.bitmaps.items():
            if len(bmp) != MASTER_SIZE or any(len(r) != MASTER_SIZE for r in bmp):
                raise ValueError(f"bitmap for {shape} is not 4x4")
            if not any("#" in r for r in bmp):
                raise ValueError(f"bitmap for {shape} has no ink")
        shapes = sorted(self.bitmaps)
        for i, a in enumerate(shapes):
            for b in shapes[i + 1 :]:
                d = _hamming(self.bitmaps[a], self.bitmaps[b])
                if d < 4:
                    raise ValueError(f"bitmaps {a}/{b} too close (hamming {d})")

    def ink_offsets(self, shape: str, cell: int) -> tuple[tuple[int, int], ...]:
        """Ink pixel offsets within one cell. At 5 px the 4x4 ink leaves a
        one-pixel trailing margin; smaller cells pool the master down."""
        bmp = _shrink(self.bitmaps[shape], min(cell, MASTER_SIZE))
        return tuple(
            (r, c)
            for r, row in enumerate(bmp)
            for c, ch in enumerate(row)
            if ch == "#"
        )


DEFAULT_ATLAS = GlyphAtlas()


@dataclass(frozen=True)
class RenderConfig:
    image_shape: ImageShape = ImageShape()
    atlas: GlyphAtlas = DEFAULT_ATLAS
    gutter: int = GUTTER
    cell_ladder: tuple[int, ...] = CELL_LADDER


DEFAULT_CONFIG = RenderConfig()


@dataclass(frozen=True)
class Placement:
    shape: str
    row: int
    col: int
    region: int
    x: int
    y: int


@dataclass(frozen=True)
class Box:
    x: int
    y: int
    width: int
    height: int


@dataclass(frozen=True)
class SceneGraph:
    cell: int
    placements: tuple[Placement, ...]
    regions: tuple[Box, ...]


def layout(program: Program, config: RenderConfig = DEFAULT_CONFIG) -> SceneGraph:
    """Place every glyph, anchored top-left, or raise LayoutCapacityError."""
    shape = config.image_shape
    for cell in config.cell_ladder:
        width = sum(cmd.cols * cell for cmd in program.commands)
        width += config.gutter * (len(program.commands) - 1)
        height = max(cmd.rows * cell for cmd in program.commands)
        if width <= shape.width and height <= shape.height:
            break
    else:
        raise LayoutCapacityError(
            f"{total_glyphs(program)} glyphs cannot fit {shape.width}x{shape.height}"
        )
    placements: list[Placement] = []
    regions: list[Box] = []
    x = 0
    for index, cmd in enumerate(program.commands):
        regions.append(Box(x, 0, cmd.cols * cell, cmd.rows * cell))
        for r in range(cmd.rows):
            for c in range(cmd.cols):
                placements.append(
                    Placement(cmd.shape, r, c, index, x + c * cell, r * cell)
                )
        x += cmd.cols * cell + config.gutter
    return SceneGraph(cell, tuple(placements), tuple(regions))


def rasterize(scene: SceneGraph, config: RenderConfig = DEFAULT_CONFIG) -> Image:
    shape = config.image_shape
    buf = bytearray(shape.height * shape.width)
    for p in scene.placements:
        for dr, dc in config.atlas.ink_offsets(p.shape, scene.cell):
            buf[(p.y + dr) * shape.width + (p.x + dc)] = INK
    return Image(shape, bytes(buf))


def render(text: str, config: RenderConfig = DEFAULT_CONFIG) -> Image:
    """Parse, lay out and rasterize a command string."""
    return rasterize(layout(parse_program(text), config), config)


def render_program(program: Program, config: RenderConfig = DEFAULT_CONFIG) -> Image:
    return rasterize(layout(program, config), config)


def image_digest(image: Image) -> int:
    """FNV-1a 64-bit over the raw pixel buffer."""
    h = FNV_OFFSET
    for b in image.pixels:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h
