"""Seeded random draws: continued-fraction prefixes of uniform alpha, and points of the circle."""
from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from sturmian_targets.config.settings import settings
from sturmian_targets.models.cf_core import Alpha, make_alpha
from sturmian_targets.models.errors import DomainError, SamplingError
from sturmian_targets.models.intervals import IntervalSet
from sturmian_targets.services.runner import Runner


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for sample ``index`` of a run seeded with ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, index]))


def _draw_bits(rng: np.random.Generator, bits: int) -> int:
    return int.from_bytes(rng.bytes((bits + 7) // 8), "big") >> (-bits % 8)


def _leading_elements(num: int, den: int, n: int) -> Tuple[int, ...]:
    elements = []
    while num and len(elements) < n:
        a, rem = divmod(den, num)
        elements.append(a)
        den, num = num, rem
    return tuple(elements)


def _certified_prefix(u: int, bits: int, n: int) -> Optional[Tuple[int, ...]]:
    """The first n elements shared by every alpha in [u/2^bits, (u+1)/2^bits), if both ends agree."""
    low = _leading_elements(u, 1 << bits, n + 1)
    high = _leading_elements(u + 1, 1 << bits, n + 1)
    if len(low) <= n or len(high) <= n or low[:n] != high[:n]:
        return None
    return low[:n]


def sample_prefix(rng: np.random.Generator, n: int) -> Optional[Tuple[int, ...]]:
    """First n elements of a uniform alpha, or None when 4B bits do not pin them down."""
    if n < 1:
        raise DomainError(f"need at least one element, got {n}")
    bits = 64 + 16 * n
    u = _draw_bits(rng, bits)
    for _ in range(3):
        prefix = _certified_prefix(u, bits, n)
        if prefix is not None:
            return prefix
        ### refine with fresh bits from the same stream: B -> 2B -> 4B
        u = (u << bits) | _draw_bits(rng, bits)
        bits *= 2
    return None


def sample_alpha(seed: int, n: int, index: int = 0, tail: Optional[int] = None) -> Alpha:
    prefix = sample_prefix(substream(seed, index), n)
    if prefix is None:
        raise SamplingError(f"sample {index} of seed {seed} not resolved to {n} elements")
    return make_alpha(prefix, tail)


def check_skips(skipped: int, samples: int):
    if samples and skipped / samples > settings.max_skip_fraction:
        raise SamplingError(f"{skipped} of {samples} samples lost to precision")
    if skipped:
        logger.warning(f"{skipped} of {samples} samples skipped for precision")


def uniform_point(rng: np.random.Generator, bits: Optional[int] = None) -> Fraction:
    bits = bits or settings.point_bits
    return Fraction(_draw_bits(rng, bits), 1 << bits)


def point_in(rng: np.random.Generator, target: IntervalSet, bits: Optional[int] = None) -> Fraction:
    """Lebesgue-uniform point of ``target`` at dyadic resolution: a piece by length, then a point in it."""
    if target.is_empty():
        raise SamplingError("cannot sample from an empty set")
    bits = bits or settings.point_bits
    pieces = target.pieces
    weights = np.array([float(b - a) for a, b in pieces])
    a, b = pieces[int(rng.choice(len(pieces), p=weights / weights.sum()))]
    x = a + (b - a) * uniform_point(rng, bits)
    if not target.contains(x):
        raise SamplingError(f"sampled point {x} fell outside the target")  # unreachable for [a, b)
    return x


def prefixes(seed: int, n: int, samples: int, jobs: Optional[int] = None) -> Sequence[Optional[Tuple[int, ...]]]:
    """Prefix of sample idx for idx < samples, None where precision ran out; same result for any jobs."""
    return Runner(jobs).map(lambda idx: sample_prefix(substream(seed, idx), n), range(samples))
