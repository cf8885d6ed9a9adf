"""Poisson noise synthesis and the Anscombe variance stabilizer.

Sampling is deterministic per (pixel index, seed): every draw comes from a
counter-based uniform stream (SplitMix64-style finalizers over the tuple
(seed, pixel, draw)), so any subset of pixels can be generated concurrently
or re-generated in isolation with bit-identical results. Means below 10 use
inversion by sequential search (one uniform per pixel); larger means use
transformed rejection, which consumes uniform pairs until acceptance.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np
from scipy.special import gammaln

from .images import check_image

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_DRAW = np.uint64(0xD1B54A32D192ED03)

_INVERSION_CUTOFF = 10.0


def _finalize(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _uniforms(seed_base, pixel_idx, draw):
    """U(0,1) doubles for one draw index across an array of pixel indices."""
    with np.errstate(over="ignore"):
        z = seed_base + pixel_idx * _GOLDEN + np.uint64(draw) * _DRAW
        z = _finalize(_finalize(z))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _seed_base(seed):
    z = np.uint64(int(seed) % (1 << 64))
    with np.errstate(over="ignore"):
        return _finalize(z * _MIX2 + _GOLDEN)


def _poisson_inversion(lam, u):
    """Walk the CDF until it passes u. Valid for small means."""
    k = np.zeros(lam.size)
    p = np.exp(-lam)
    cdf = p.copy()
    active = u >= cdf
    while active.any():
        k[active] += 1.0
        p[active] *= lam[active] / k[active]
        cdf[active] += p[active]
        # underflowed tail: the remaining mass is below float resolution
        active &= (u >= cdf) & (p > 0)
    return k


def _poisson_rejection(lam, seed_base, pixel_idx):
    """Transformed rejection with squeeze tests. Valid for means >= 10."""
    b = 0.931 + 2.53 * np.sqrt(lam)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)
    log_lam = np.log(lam)

    out = np.zeros(lam.size)
    todo = np.arange(lam.size)
    for round_idx in range(1000):
        u = _uniforms(seed_base, pixel_idx[todo], 1 + 2 * round_idx) - 0.5
        v = _uniforms(seed_base, pixel_idx[todo], 2 + 2 * round_idx)
        us = 0.5 - np.abs(u)
        k = np.floor((2.0 * a[todo] / us + b[todo]) * u + lam[todo] + 0.43)
        accept = (us >= 0.07) & (v <= v_r[todo])
        plain_reject = (k < 0) | ((us < 0.013) & (v > us))
        test = np.flatnonzero(~accept & ~plain_reject)
        if test.size:
            tt = todo[test]
            lhs = np.log(v[test] * inv_alpha[tt] / (a[tt] / us[test] ** 2 + b[tt]))
            rhs = k[test] * log_lam[tt] - lam[tt] - gammaln(k[test] + 1.0)
            accept[test[lhs <= rhs]] = True
        out[todo[accept]] = k[accept]
        todo = todo[~accept]
        if todo.size == 0:
            return out
    raise RuntimeError("Poisson rejection sampler failed to terminate")


def sample_poisson(clean, seed):
    """Draw an integer-count image with per-pixel Poisson means `clean`.

    Zero means produce zeros deterministically. Identical (clean, seed)
    pairs produce identical outputs.
    """
    img = check_image(clean, "clean")
    lam = img.ravel()
    base = _seed_base(seed)
    idx = np.arange(lam.size, dtype=np.uint64)
    out = np.zeros(lam.size)

    small = np.flatnonzero((lam > 0) & (lam < _INVERSION_CUTOFF))
    if small.size:
        out[small] = _poisson_inversion(lam[small], _uniforms(base, idx[small], 0))
    big = np.flatnonzero(lam >= _INVERSION_CUTOFF)
    if big.size:
        out[big] = _poisson_rejection(lam[big], base, idx[big])
    return out.reshape(img.shape)


def anscombe_forward(y):
    """Variance-stabilizing map 2*sqrt(y + 3/8)."""
    y = check_image(y, "counts")
    return 2.0 * np.sqrt(y + 0.375)


def anscombe_inverse(z):
    """Algebraic inverse (z/2)^2 - 3/8, clamped at 0."""
    z = check_image(z, "stabilized", nonneg=False)
    return np.maximum((z / 2.0) ** 2 - 0.375, 0.0)


def derive_seed(base_seed, peak, realization):
    """Stable per-cell seed so experiment cells are decoupled streams."""
    payload = struct.pack("<Qdq", int(base_seed) % (1 << 64), float(peak),
                          int(realization))
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return int.from_bytes(digest, "little")
