"""Connected-component probe: do reconstructions keep the glyph count?

The published program strings are a documented format, so a small regex
oracle recovers each image's glyph count independently of the game package.
Probe inputs are restricted to images whose own component count equals the
glyph count (i.e. glyphs that do not touch), so the ground truth is clean;
reconstructions then have to land within +/-1 component.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np
import torch
from scipy import ndimage

from .data import Corpus
from .models import SymbolicAE

_COMMAND = re.compile(
    r"^([ABC]{1,2})(?:([012]+)\*([012]+)|\*([012]+)|([012]+))?$"
)
_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


def expected_glyphs(program: str) -> int:
    """Glyphs a program places: the product of each command's two counts."""
    total = 0
    for segment in program.split("+"):
        match = _COMMAND.match(segment)
        if match is None:
            raise ValueError(f"not a command: {segment!r}")
        _, grid_rows, grid_cols, row_cols, col_rows = match.groups()
        if grid_rows is not None:
            total += int(grid_rows, 3) * int(grid_cols, 3)
        elif row_cols is not None:
            total += int(row_cols, 3)
        elif col_rows is not None:
            total += int(col_rows, 3)
        else:
            total += 1
    return total


def count_components(image: torch.Tensor, threshold: float = 0.5) -> int:
    """8-connected components of a thresholded [1, H, W] image."""
    binary = image.squeeze(0).detach().numpy() > threshold
    _, count = ndimage.label(binary, structure=_EIGHT_CONNECTED)
    return count


@dataclass(frozen=True)
class ProbeResult:
    probed: int
    within_one: int

    @property
    def fraction(self) -> float:
        return self.within_one / self.probed if self.probed else 0.0


def probe_reconstructions(
    model: SymbolicAE, corpus: Corpus, limit: int = 200
) -> ProbeResult:
    """Fraction of clean probe images whose reconstruction keeps the glyph
    count within one component."""
    model.eval()
    probed = within = 0
    for program, image in zip(corpus.programs, corpus.images):
        if probed == limit:
            break
        expected = expected_glyphs(program)
        if count_components(image) != expected:
            continue  # touching glyphs: no clean ground truth
        with torch.no_grad():
            recon = model(image.unsqueeze(0))[0][0]
        probed += 1
        within += abs(count_components(recon) - expected) <= 1
    return ProbeResult(probed, within)
