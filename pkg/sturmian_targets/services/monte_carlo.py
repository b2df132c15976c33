"""Monte Carlo estimates over uniformly drawn alpha.

Every sample index owns its own substream, so the tables below depend only
on (seed, samples, n) and not on the worker count.
"""
from __future__ import annotations

from collections import Counter
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from sturmian_targets.api.schemas import GaussKuzmin, GrowthRow, LargeElementStats, WnEstimate
from sturmian_targets.models.errors import DomainError
from sturmian_targets.services.sampling import check_skips, prefixes

Z_99 = 2.5758293035489  ## two-sided 99% normal quantile


def _resolved(seed: int, n: int, samples: int, jobs: Optional[int]) -> Tuple[List[Tuple[int, ...]], int]:
    drawn = prefixes(seed, n, samples, jobs)
    kept = [p for p in drawn if p is not None]
    skipped = samples - len(kept)
    check_skips(skipped, samples)
    return kept, skipped


def wn_threshold(n: int) -> float:
    """10 n log n, natural log."""
    return 10 * n * float(np.log(n))


def monte_carlo_Wn(n: int, samples: int, seed: int, jobs: Optional[int] = None) -> WnEstimate:
    """Frequency of W_n = {sum a_i < 10 n log n}, with A_n = {a_i < n^2, i <= n} alongside."""
    if n < 10:
        raise DomainError(f"W_n is estimated for n >= 10, got {n}")
    if samples < 1:
        raise DomainError("need at least one sample")
    logger.info(f"estimating lambda(W_{n}) from {samples} samples, seed {seed}")
    kept, skipped = _resolved(seed, n, samples, jobs)
    sums = np.array([sum(p) for p in kept], dtype=float)
    in_w = sums < wn_threshold(n)
    in_a = np.array([max(p) < n * n for p in kept], dtype=bool) if kept else np.zeros(0, dtype=bool)
    hits = int(in_w.sum())
    used = len(kept)
    estimate = hits / used if used else 0.0
    sigma = float(np.sqrt(estimate * (1 - estimate) / used)) if used else 0.0
    return WnEstimate(
        n=n, samples=used, hits=hits, estimate=estimate,
        half_width_99=Z_99 * sigma, sigma=sigma, skipped=skipped,
        an_hits=int(in_a.sum()), joint_hits=int((in_w & in_a).sum()),
    )


def first_large_element(prefix: Sequence[int], C: Fraction) -> Optional[int]:
    """Smallest m >= 2 with a_m > C * (a_1 + ... + a_{m-1})."""
    total = prefix[0]
    for m in range(2, len(prefix) + 1):
        a_m = prefix[m - 1]
        if a_m > C * total:
            return m
        total += a_m
    return None


def find_large_element(seed: int, C: Fraction, n_max: int, samples: int,
                       jobs: Optional[int] = None) -> LargeElementStats:
    C = Fraction(C)
    if C < 1:
        raise DomainError(f"C={C} must be at least 1")
    if not 2 <= n_max <= 200:
        raise DomainError(f"n_max={n_max} outside 2..200")
    logger.info(f"searching a_m > {C} * sum a_i, m <= {n_max}, over {samples} samples")
    kept, skipped = _resolved(seed, n_max, samples, jobs)

    first_m: Counter = Counter()
    g_hits: Counter = Counter()
    implication_ok = True
    for prefix in kept:
        m = first_large_element(prefix, C)
        if m is not None:
            first_m[m] += 1
        partial = np.cumsum(prefix, dtype=object)
        for m in range(10, n_max + 1):
            bound = wn_threshold(m - 1)
            ### G_m = W_{m-1} and a_m >= 10 C (m-1) log(m-1)
            if partial[m - 2] < bound and prefix[m - 1] >= float(C) * bound:
                g_hits[m] += 1
                if not prefix[m - 1] > C * partial[m - 2]:
                    implication_ok = False
                    logger.error(f"G_{m} holds without the large-element condition for {prefix[:m]}")
    found = sum(first_m.values())
    return LargeElementStats(
        C=str(C), n_max=n_max, samples=len(kept), found=found,
        fraction=found / len(kept) if kept else 0.0,
        first_m=dict(sorted(first_m.items())),
        g_m_hits=dict(sorted(g_hits.items())),
        implication_ok=implication_ok, skipped=skipped,
    )


def sum_ai_growth(seed: int, checkpoints: Sequence[int] = (10, 100, 1000), samples: int = 1000,
                  jobs: Optional[int] = None) -> List[GrowthRow]:
    """Per checkpoint n: how often a_1 + ... + a_n exceeds n (log n)^3."""
    checkpoints = sorted(set(checkpoints))
    if not checkpoints or checkpoints[0] < 1:
        raise DomainError(f"checkpoints must be positive, got {checkpoints}")
    kept, _ = _resolved(seed, checkpoints[-1], samples, jobs)
    rows = []
    for n in checkpoints:
        sums = np.array([float(sum(p[:n])) for p in kept])
        bound = n * float(np.log(n)) ** 3
        exceeding = int((sums > bound).sum())
        rows.append(GrowthRow(
            n=n, samples=len(kept), exceeding=exceeding,
            fraction_exceeding=exceeding / len(kept) if kept else 0.0,
            mean_sum=float(sums.mean()) if kept else 0.0,
            median_sum=float(np.median(sums)) if kept else 0.0,
        ))
    return rows


def gauss_kuzmin_check(samples: int, seed: int, position: int = 20, jobs: Optional[int] = None) -> GaussKuzmin:
    """Share of a_position = 1 against its Gauss-Kuzmin limit log2(4/3)."""
    if position < 1:
        raise DomainError(f"position must be positive, got {position}")
    kept, skipped = _resolved(seed, position, samples, jobs)
    ones = sum(1 for p in kept if p[-1] == 1)
    fraction = ones / len(kept) if kept else 0.0
    expected = float(np.log2(4 / 3))
    z = (fraction - expected) / float(np.sqrt(expected * (1 - expected) / len(kept))) if kept else 0.0
    return GaussKuzmin(samples=len(kept), ones=ones, fraction=fraction, expected=expected,
                       z_score=z, skipped=skipped)
