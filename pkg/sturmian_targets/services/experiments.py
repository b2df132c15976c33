"""Exact experiments on the targets: log-ratio series, h_i correlations,
Kesten counts, quasi-independence and the gap construction for the
non-convergence theorem."""
from __future__ import annotations

from fractions import Fraction
from math import ceil
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from loguru import logger

from sturmian_targets.api.schemas import (
    HStat,
    KestenResult,
    OscillationReport,
    PairGap,
    PairStat,
    QuasiIndependence,
    RationalOut,
    RatioPoint,
    RatioSeries,
    ThmBConfig,
    ThmBReport,
    UnionIndependence,
    WCheck,
    render,
)
from sturmian_targets.config.settings import settings
from sturmian_targets.models.cf_core import Alpha, make_alpha, theta
from sturmian_targets.models.errors import DomainError, HorizonError, SamplingError
from sturmian_targets.models.intervals import CircleInterval, IntervalSet, count_progression_hits, frac_part
from sturmian_targets.models.targets import (
    V_interval,
    block_union,
    count_hits,
    count_undetermined,
    j_index,
    measure_V,
    measure_sum,
)
from sturmian_targets.services.runner import Runner
from sturmian_targets.services.sampling import point_in, substream, uniform_point


def log_ratio(count: int, total: Fraction) -> Optional[str]:
    """log(count) / log(total) at settings.decimal_digits, or None when either log is not positive."""
    if count <= 1 or total <= 1:
        return None
    with mpmath.workdps(settings.decimal_digits):
        value = mpmath.log(count) / mpmath.log(mpmath.mpf(total.numerator) / total.denominator)
        return mpmath.nstr(value, settings.decimal_digits)


def _index_ending_at(alpha: Alpha, N: int) -> Optional[int]:
    for n in range(1, alpha.horizon_k):
        if alpha.q(n) - 1 == N:
            return n
        if alpha.q(n) - 1 > N:
            return None
    return None


def theorem_a_ratio(alpha: Alpha, x: Fraction, checkpoints: Sequence[int]) -> RatioSeries:
    points = []
    for N in checkpoints:
        report = count_undetermined(alpha, x, N)
        point = RatioPoint(
            N=N,
            count=report.count,
            measure_sum=RationalOut.of(report.measure_sum),
            ratio=log_ratio(report.count, report.measure_sum),
        )
        n = _index_ending_at(alpha, N)
        if n is not None:
            elements = sum(alpha.cf.elements[:n])
            point.n = n
            point.pointwise_ok = Fraction(n - 2, 4) < report.count <= elements
            point.setwise_ok = Fraction(n - 2, 2) < report.measure_sum < elements
        points.append(point)
    return RatioSeries(alpha=alpha.spec, x=RationalOut.of(frac_part(Fraction(x))), points=points)


def theorem_a_sweep(alpha: Alpha, checkpoints: Sequence[int], samples: int, seed: int,
                    jobs: Optional[int] = None) -> List[RatioSeries]:
    """theorem_a_ratio for ``samples`` uniform points, point idx drawn from substream (seed, idx)."""
    def one(idx: int) -> RatioSeries:
        return theorem_a_ratio(alpha, uniform_point(substream(seed, idx)), checkpoints)

    logger.info(f"log-ratio sweep over {samples} points, checkpoints {list(checkpoints)}")
    return Runner(jobs).map(one, range(samples))


def median_distance_from_one(series: List[RatioSeries], position: int) -> Optional[float]:
    values = [abs(float(s.points[position].ratio) - 1) for s in series if s.points[position].ratio is not None]
    return float(np.median(values)) if values else None


def h_support(alpha: Alpha, i: int) -> IntervalSet:
    """Support of h_i: the union of V_j over J^i_2."""
    return block_union(alpha, j_index(alpha, i, 2))


def h_integral(alpha: Alpha, i: int, with_support: Optional[bool] = None) -> HStat:
    """Integral of h_i, q_i * theta_{i-1}; checked to lie in (q_i/(q_i+q_{i-1}), 1)."""
    if i < 1:
        raise DomainError(f"h_i is defined for i >= 1, got {i}")
    block = j_index(alpha, i, 2)
    if block.stop > alpha.horizon_j:
        raise HorizonError(f"J^{i}_2 reaches past horizon_j={alpha.horizon_j}")
    integral = alpha.q(i) * theta(alpha, i - 1)
    lower = Fraction(alpha.q(i), alpha.q(i) + alpha.q(i - 1))
    ok = Fraction(1, 2) <= lower < integral < 1
    pieces = None
    if with_support is None:
        with_support = alpha.q(i) <= settings.oracle_max
    if with_support:
        support = h_support(alpha, i)
        pieces = len(support)
        ok = ok and support.measure() == integral
    return HStat(i=i, integral=RationalOut.of(integral), lower=RationalOut.of(lower), pieces=pieces, ok=ok)


def h_pair_integral(alpha: Alpha, i: int, j: int) -> PairStat:
    """Integral of h_i h_j against (1 -/+ 3q_{i+1}/q_j) * integral(h_i) * integral(h_j)."""
    if not 1 <= i < j:
        raise DomainError(f"need 1 <= i < j, got i={i}, j={j}")
    support_i, support_j = h_support(alpha, i), h_support(alpha, j)
    value = support_i.intersection(support_j).measure()
    product = alpha.q(i) * theta(alpha, i - 1) * alpha.q(j) * theta(alpha, j - 1)
    factor = Fraction(3 * alpha.q(i + 1), alpha.q(j))
    vacuous = factor >= 1
    within = (1 - factor) * product <= value <= (1 + factor) * product
    # |value - product| <= 6 * 2^{-(j-i)/2}, squared to stay rational
    decay_ok = (value - product) ** 2 * 2 ** (j - i) <= 36
    return PairStat(
        i=i, j=j,
        value=RationalOut.of(value),
        product=RationalOut.of(product),
        factor=RationalOut.of(factor),
        vacuous=vacuous,
        within_bounds=within,
        decay_ok=decay_ok,
    )


def decay_check(alpha: Alpha, i: int, j: int) -> bool:
    return h_pair_integral(alpha, i, j).decay_ok


def kesten_count(alpha: Alpha, arc: CircleInterval, i: int, b: int) -> KestenResult:
    """#{l in J^i_b : {-l*alpha} in arc}, within 2 of length(arc) * |J^i_b|."""
    block = j_index(alpha, i, b)
    alpha.check_time(block.stop)
    count = count_progression_hits(-block.start * alpha.value, -alpha.value, len(block), arc)
    expected = arc.length * len(block)
    return KestenResult(i=i, b=b, count=count, expected=RationalOut.of(expected), ok=abs(count - expected) <= 2)


def _qi_terms(alpha: Alpha, k: int, i: int, b: int):
    if alpha.q(i) <= k:
        raise DomainError(f"quasi-independence needs q_{i}={alpha.q(i)} > k={k}")
    v_k = V_interval(alpha, k)
    block = j_index(alpha, i, b)
    value = v_k.to_set().intersection(block_union(alpha, block)).measure()
    piece = measure_V(alpha, block.start)
    base = v_k.length * len(block)
    # (base -/+ 3)/base times lambda(V_k) * lambda(union) = lambda(V_k)|J|L -/+ 3L
    return value, base * piece - 3 * piece, base * piece + 3 * piece, base <= 3


def quasi_independence_check(alpha: Alpha, k: int, i: int, b: int) -> QuasiIndependence:
    value, lower, upper, vacuous = _qi_terms(alpha, k, i, b)
    return QuasiIndependence(
        k=k, i=i, b=b,
        value=RationalOut.of(value), lower=RationalOut.of(lower), upper=RationalOut.of(upper),
        vacuous=vacuous, ok=lower <= value <= upper,
    )


def quasi_independence_union(alpha: Alpha, i: int, b_prime: int, j: int, b: int) -> UnionIndependence:
    """lambda(union of V_k over J^i_b' meeting the union of V_l over J^j_b), j > i.

    The V_k of one block are disjoint with a common measure, so the single-k
    bounds add up to (base -/+ 3)/base * lambda(union_k) * lambda(union_l)
    with base = lambda(V_k) |J^j_b|.
    """
    if not 0 <= i < j:
        raise DomainError(f"need 0 <= i < j, got i={i}, j={j}")
    inner, outer = j_index(alpha, i, b_prime), j_index(alpha, j, b)
    union_k, union_l = block_union(alpha, inner), block_union(alpha, outer)
    value = union_k.intersection(union_l).measure()
    base = measure_V(alpha, inner.start) * len(outer)
    product = union_k.measure() * union_l.measure()
    lower, upper = (base - 3) / base * product, (base + 3) / base * product
    return UnionIndependence(
        i=i, b_prime=b_prime, j=j, b=b,
        value=RationalOut.of(value), lower=RationalOut.of(lower), upper=RationalOut.of(upper),
        vacuous=base <= 3, ok=lower <= value <= upper,
    )


def w_set(alpha: Alpha, m: int, b: int) -> IntervalSet:
    """W_b = union of V_j over J^{m-1}_b."""
    return block_union(alpha, j_index(alpha, m - 1, b))


def w_closed_form(alpha: Alpha, m: int, b: int) -> Fraction:
    return alpha.q(m - 1) * (theta(alpha, m - 2) - (b - 2) * theta(alpha, m - 1))


def theorem_b_alpha(k: int = 10, C: Fraction = Fraction(1000), A: Optional[int] = None,
                    tail: Optional[int] = None) -> Alpha:
    """k ones, then A at position m = k+1, then one guard element so that q_m - 1 stays in the horizon."""
    A = A or max(ceil(C * k) + 1, 10**5)
    return make_alpha([1] * k + [A, 1], tail)


def _branch_scale(alpha: Alpha, cfg: ThmBConfig) -> Dict[str, int]:
    m = cfg.m
    if m > alpha.horizon_k - 1:
        raise HorizonError(f"m={m} needs q_m inside the horizon (m < {alpha.horizon_k})")
    a_m = alpha.a(m)
    before = sum(alpha.cf.elements[:m - 1])
    if not a_m > cfg.C * before:
        raise DomainError(f"a_{m}={a_m} does not exceed C * {before} = {cfg.C * before}")
    rho_a, sigma_a = cfg.rho * a_m, cfg.sigma * a_m
    if rho_a.denominator != 1 or sigma_a.denominator != 1:
        raise DomainError(f"rho*a_m={rho_a} and sigma*a_m={sigma_a} must be integers")
    if sigma_a < 2:
        raise DomainError(f"sigma*a_m={sigma_a} must be at least 2")
    return {"a_m": a_m, "rho_a": int(rho_a), "sigma_a": int(sigma_a)}


def x_y_sets(alpha: Alpha, cfg: ThmBConfig):
    scale = _branch_scale(alpha, cfg)
    X = w_set(alpha, cfg.m, scale["rho_a"])
    Y = w_set(alpha, cfg.m, 1).difference(w_set(alpha, cfg.m, scale["sigma_a"]))
    return X, Y, scale


def f_value(alpha: Alpha, x: Fraction, m: int) -> Fraction:
    """f_m(x): hits of x over j < q_m divided by the measure sum over the same times."""
    N = alpha.q(m) - 1
    return Fraction(count_hits(alpha, x, N)) / measure_sum(alpha, N)


def theorem_b_experiment(alpha: Alpha, cfg: ThmBConfig, samples: int = 50, seed: int = 0,
                         jobs: Optional[int] = None) -> ThmBReport:
    X, Y, scale = x_y_sets(alpha, cfg)
    m, a_m = cfg.m, scale["a_m"]
    lam_X, lam_Y = X.measure(), Y.measure()
    logger.info(f"W sets built: lambda(X)={render(lam_X, 8)}, lambda(Y)={render(lam_Y, 8)}")

    checked = sorted({int(b) for b in np.linspace(2, a_m, 8)} | {scale["sigma_a"], scale["rho_a"]})
    w_checks, previous, nested = [], None, True
    for b in checked:
        current = w_set(alpha, m, b)
        closed = w_closed_form(alpha, m, b)
        w_checks.append(WCheck(b=b, measure=RationalOut.of(current.measure()),
                               closed_form=RationalOut.of(closed), ok=current.measure() == closed))
        if previous is not None:
            nested = nested and current.is_subset(previous)
        previous = current

    D = cfg.gap_lower
    N, N_before = alpha.q(m) - 1, alpha.q(m - 1) - 1
    total = measure_sum(alpha, N)

    def one(idx: int) -> Tuple[PairGap, Fraction]:
        x = point_in(substream(seed, 2 * idx), X)
        y = point_in(substream(seed, 2 * idx + 1), Y)
        hits_x, hits_y = count_hits(alpha, x, N), count_hits(alpha, y, N)
        block_x = hits_x - count_hits(alpha, x, N_before)
        block_y = hits_y - count_hits(alpha, y, N_before)
        f_x, f_y = Fraction(hits_x) / total, Fraction(hits_y) / total
        gap_ok = f_x - f_y >= D and block_x >= scale["rho_a"] - 1 and block_y <= scale["sigma_a"] - 1
        pair = PairGap(x=RationalOut.of(x), y=RationalOut.of(y), f_x=render(f_x), f_y=render(f_y),
                       block_x=block_x, block_y=block_y, gap_ok=gap_ok)
        return pair, f_x - f_y

    results = Runner(jobs).map(one, range(samples))
    pairs = [pair for pair, _ in results]
    gaps = [gap for _, gap in results]
    ok = (lam_X >= Fraction(1, 4) and lam_Y >= Fraction(1, 128) and nested
          and all(w.ok for w in w_checks) and all(p.gap_ok for p in pairs))
    return ThmBReport(
        alpha=alpha.spec, m=m, a_m=a_m,
        rho=str(cfg.rho), sigma=str(cfg.sigma), C=str(cfg.C),
        lambda_X=RationalOut.of(lam_X), lambda_Y=RationalOut.of(lam_Y), gap_lower=RationalOut.of(D),
        w_checks=w_checks, nested=nested, pairs=pairs,
        min_gap=render(min(gaps)) if gaps else None,
        ok=ok,
    )


def theorem_b_oscillation(alpha: Optional[Alpha] = None, m1: int = 4, m2: int = 6,
                          rho: Fraction = Fraction(1, 5), sigma: Fraction = Fraction(1, 10),
                          C: Fraction = Fraction(20), seed: int = 0) -> OscillationReport:
    """A point of X_{m1} inside Y_{m2}: f moves by at least D/2 between the two checkpoints."""
    alpha = alpha or make_alpha([1, 1, 1, 200, 1, 5000, 1])
    first = ThmBConfig(m=m1, rho=rho, sigma=sigma, C=C)
    second = ThmBConfig(m=m2, rho=rho, sigma=sigma, C=C)
    X1, _, _ = x_y_sets(alpha, first)
    _, Y2, _ = x_y_sets(alpha, second)
    target = X1.intersection(Y2)
    if target.is_empty():
        raise SamplingError(f"X_{m1} and Y_{m2} do not meet")
    x = point_in(substream(seed, 0), target)
    f1, f2 = f_value(alpha, x, m1), f_value(alpha, x, m2)
    threshold = first.gap_lower / 2
    return OscillationReport(
        alpha=alpha.spec, m1=m1, m2=m2, x=RationalOut.of(x),
        f_m1=render(f1), f_m2=render(f2), difference=render(f1 - f2),
        threshold=RationalOut.of(threshold), ok=abs(f1 - f2) >= threshold,
    )
