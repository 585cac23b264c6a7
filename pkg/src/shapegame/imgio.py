"""Image file formats. PGM (binary P5) is the golden format: bit-exact and
trivially diffable. PNG is offered for browsers and notebooks."""

from __future__ import annotations

import io
from pathlib import Path

from PIL import Image as PILImage

from .render import Image, ImageShape


def pgm_bytes(image: Image) -> bytes:
    header = f"P5\n{image.shape.width} {image.shape.height}\n255\n"
    return header.encode("ascii") + image.pixels


def write_pgm(image: Image, path: str | Path) -> None:
    Path(path).write_bytes(pgm_bytes(image))


def read_pgm(path: str | Path) -> Image:
    data = Path(path).read_bytes()
    fields: list[bytes] = []
    i = 0
    while len(fields) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        fields.append(data[i:j])
        i = j
    if fields[0] != b"P5":
        raise ValueError(f"not a binary PGM: {path}")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval}")
    pixels = data[i + 1 : i + 1 + width * height]
    if len(pixels) != width * height:
        raise ValueError(f"truncated pixel data in {path}")
    return Image(ImageShape(height, width), pixels)


def png_bytes(image: Image) -> bytes:
    pil = PILImage.frombytes(
        "L", (image.shape.width, image.shape.height), image.pixels
    )
    out = io.BytesIO()
    pil.save(out, format="PNG")
    return out.getvalue()


def write_png(image: Image, path: str | Path) -> None:
    Path(path).write_bytes(png_bytes(image))
