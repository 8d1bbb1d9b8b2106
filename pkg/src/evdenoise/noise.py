"""Synthetic background-activity (BA) and hot-pixel noise with ground truth.

Noise counts are relative to the number of clean events in the input, and are
exact: ``floor(ratio * n_clean + 0.5)``. Events already labelled noise are
kept as noise and excluded from ``n_clean``, so the two injectors can be
chained.

Random numbers come from numpy's Philox counter-based generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .events import NOISE, REAL, EventStream

RNG_ALGORITHM = "numpy.random.Philox"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True)
class NoiseSpec:
    ba_ratio: float = 0.10
    hot_ratio: float = 0.02
    hot_pixel_count: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.ba_ratio < 0 or self.hot_ratio < 0:
            raise ValueError("noise ratios must be non-negative")
        if self.hot_pixel_count < 1:
            raise ValueError("hot_pixel_count must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def noise_count(ratio: float, n_clean: int) -> int:
    """Round-half-up count of noise events for ``ratio`` of ``n_clean``."""
    if ratio < 0:
        raise ValueError(f"ratio must be non-negative, got {ratio}")
    # tiny guard so that e.g. 0.07 * 50 = 3.5000000000000004 and 3.4999999999999996 agree
    return int(math.floor(ratio * n_clean + 0.5 + 1e-9))


def _clean_labels(stream: EventStream) -> np.ndarray:
    return np.where(stream.label == NOISE, NOISE, REAL).astype(np.int8)


def _merge(stream, labels, x, y, t) -> EventStream:
    return EventStream.from_arrays(
        np.concatenate([stream.x, x]), np.concatenate([stream.y, y]),
        np.concatenate([stream.t, t]),
        np.concatenate([labels, np.full(len(t), NOISE, dtype=np.int8)]),
        width=stream.width, height=stream.height)


def add_ba_noise(stream: EventStream, ratio: float, seed: int) -> EventStream:
    """Add uniformly scattered events over the sensor and time span."""
    labels = _clean_labels(stream)
    n_clean = int((labels == REAL).sum())
    if ratio > 0 and n_clean == 0:
        raise ValueError("cannot inject noise into an empty stream")
    n = noise_count(ratio, n_clean)
    if n == 0:
        return stream.with_labels(labels)
    rng = make_rng(seed)
    x = rng.integers(0, stream.width, size=n)
    y = rng.integers(0, stream.height, size=n)
    t = rng.uniform(stream.t_min, stream.t_max, size=n)
    return _merge(stream, labels, x, y, t)


def add_hot_pixel_noise(stream: EventStream, ratio: float, pixel_count: int,
                        seed: int) -> EventStream:
    """Add events that fire repeatedly at ``pixel_count`` fixed pixels.

    Each pixel gets a near-even share of the budget, at regularly spaced
    timestamps over ``[t_min, t_max]`` with +/-10% uniform jitter of the
    spacing, so consecutive gaps at a pixel lie in [0.8, 1.2] x spacing.
    """
    labels = _clean_labels(stream)
    n_clean = int((labels == REAL).sum())
    if ratio > 0 and n_clean == 0:
        raise ValueError("cannot inject noise into an empty stream")
    n = noise_count(ratio, n_clean)
    if n == 0:
        return stream.with_labels(labels)
    if pixel_count < 1 or pixel_count > n:
        raise ValueError(f"pixel_count must be between 1 and the noise budget {n}, got {pixel_count}")
    n_pixels = stream.width * stream.height
    if pixel_count > n_pixels:
        raise ValueError(f"pixel_count {pixel_count} exceeds the {n_pixels} sensor pixels")

    rng = make_rng(seed)
    flat = rng.choice(n_pixels, size=pixel_count, replace=False)
    px, py = flat % stream.width, flat // stream.width

    per_pixel = np.full(pixel_count, n // pixel_count)
    per_pixel[: n % pixel_count] += 1

    t0, span = stream.t_min, stream.t_max - stream.t_min
    xs, ys, ts = [], [], []
    for p in range(pixel_count):
        m = int(per_pixel[p])
        step = span / m
        jitter = rng.uniform(-0.1, 0.1, size=m)
        ts.append(t0 + (np.arange(m) + 0.5 + jitter) * step)
        xs.append(np.full(m, px[p]))
        ys.append(np.full(m, py[p]))
    return _merge(stream, labels, np.concatenate(xs), np.concatenate(ys), np.concatenate(ts))


def add_noise(stream: EventStream, spec: NoiseSpec) -> EventStream:
    """BA then hot-pixel noise, both sized against the clean count."""
    ba_seed, hot_seed = np.random.SeedSequence(spec.seed).generate_state(2, dtype=np.uint64)
    out = add_ba_noise(stream, spec.ba_ratio, int(ba_seed))
    return add_hot_pixel_noise(out, spec.hot_ratio, spec.hot_pixel_count, int(hot_seed))
