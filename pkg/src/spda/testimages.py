"""Deterministic synthetic test images, values in [0, 1].

All generators are pure functions of their arguments, so repeated calls
produce identical pixels (the CLI relies on this for reproducible files).
"""

from __future__ import annotations

import numpy as np

KINDS = ("ridges", "flag-like", "constant")


def ridges(size):
    """Diagonal piecewise-constant stripes with 8 gray levels."""
    if size < 16:
        raise ValueError("size must be >= 16")
    levels = (np.arange(8) + 1) / 8.0
    band = max(3, size // 16)
    r, c = np.mgrid[0:size, 0:size]
    return levels[((r + c) // band) % 8]


def flag_like(size):
    """Stripes plus a block of dots, loosely banner-shaped."""
    if size < 16:
        raise ValueError("size must be >= 16")
    r, c = np.mgrid[0:size, 0:size]
    stripe_h = max(2, size // 8)
    img = np.where((r // stripe_h) % 2 == 0, 1.0, 0.55)
    block = (r < size // 2) & (c < size // 2)
    img[block] = 0.25
    dots = block & (r % 4 == 1) & (c % 4 == 1)
    img[dots] = 1.0
    return img


def constant(size):
    if size < 16:
        raise ValueError("size must be >= 16")
    return np.ones((size, size))


def training_image(size):
    """Overlapping rectangles and triangles on a mid-gray background.

    Piecewise constant with a fixed internal seed; meant as the clean
    image for offline dictionary training.
    """
    if size < 16:
        raise ValueError("size must be >= 16")
    rng = np.random.default_rng(20240917)
    img = np.full((size, size), 0.5)
    r, c = np.mgrid[0:size, 0:size]
    for _ in range(9):
        r0, c0 = rng.integers(0, size - 4, size=2)
        h, w = rng.integers(size // 8, size // 2, size=2)
        img[r0:r0 + h, c0:c0 + w] = rng.integers(1, 11) / 10.0
    for _ in range(6):
        rv, cv = rng.integers(0, size, size=2)
        slope = rng.integers(1, 4)
        width = rng.integers(size // 6, size // 2)
        mask = (r - rv) * slope > np.abs(c - cv)
        mask &= (r - rv) * slope < np.abs(c - cv) + width
        img[mask] = rng.integers(1, 11) / 10.0
    img[img < 0.05] = 0.05
    return img


def make(kind, size):
    table = {"ridges": ridges, "flag-like": flag_like, "constant": constant}
    if kind not in table:
        raise ValueError(f"unknown test image kind {kind!r}")
    return table[kind](int(size))
