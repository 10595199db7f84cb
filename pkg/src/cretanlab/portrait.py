"""Grayscale portraits of matrices as binary PGM (P5) images.

Level -1 maps to black (0) and +1 to white (255) through
``gray = round(255 * (value + 1) / 2)``, rounding half to even. Exact levels
are mapped exactly, so e.g. -2/3 gives 255/6 = 42.5 -> 42 regardless of float
rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .qfield import QuadExt

__all__ = ["PortraitSpec", "gray_level", "render_pgm"]


def _round_half_even_exact(z: QuadExt) -> int:
    f = math.floor(float(z))
    while z < f:
        f -= 1
    while z >= f + 1:
        f += 1
    frac = z - f
    half = Fraction(1, 2)
    if frac > half or (frac == half and f % 2 == 1):
        return f + 1
    return f


def gray_level(value) -> int:
    """Gray value in [0, 255] for a level in [-1, 1]; out-of-range levels are clipped."""
    if isinstance(value, (QuadExt, Rational)):
        z = QuadExt(value) if not isinstance(value, QuadExt) else value
        if z <= -1:
            return 0
        if z >= 1:
            return 255
        return _round_half_even_exact(255 * (z + 1) / 2)
    x = min(1.0, max(-1.0, float(value)))
    return int(round(255 * (x + 1) / 2))


@dataclass(frozen=True)
class PortraitSpec:
    cell_size: int = 1

    def __post_init__(self):
        if self.cell_size < 1:
            raise ValueError("cell_size must be at least 1")

    def value_map(self, value) -> int:
        return gray_level(value)


def render_pgm(grid, spec: PortraitSpec = PortraitSpec()) -> bytes:
    """Binary graymap of a square grid of level values, one block per cell."""
    cache: dict = {}
    pixels = []
    for row in grid:
        out = []
        for value in row:
            key = value if isinstance(value, (QuadExt, Rational)) else float(value)
            if key not in cache:
                cache[key] = gray_level(value)
            out.append(cache[key])
        pixels.append(out)
    img = np.array(pixels, dtype=np.uint8)
    if img.ndim != 2 or img.shape[0] != img.shape[1]:
        raise ValueError("portrait input must be a square matrix")
    c = spec.cell_size
    img = np.repeat(np.repeat(img, c, axis=0), c, axis=1)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()
