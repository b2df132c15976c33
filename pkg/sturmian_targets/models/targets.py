"""Closed-form shrinking targets V_j of the rotation.

For time j let q_k be the largest convergent denominator with q_k <= j,
r = q_k, s = q_{k-1} and t = (j - s) // r.  The image R(U_j) of the target is
the arc around 0 bounded by the signed errors e_k and e_{k-1} + t*e_k, of
length theta_k + theta_{k-1} - t*theta_k, and V_j = R^{-(j+1)}(R(U_j)).

(r, s, t) is constant on every block J^i_b of times, so sums over j are
computed block by block instead of index by index.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Dict, Iterator, List, Optional, Tuple

from loguru import logger

from sturmian_targets.config.settings import settings
from sturmian_targets.models.cf_core import Alpha, signed_error, theta
from sturmian_targets.models.errors import DomainError, HorizonError, VerificationError
from sturmian_targets.models.intervals import CircleInterval, IntervalSet, count_progression_hits, frac_part

BELOW_HALF = "frac_r_below_half"
ABOVE_HALF = "frac_r_above_half"


@dataclass(frozen=True)
class TargetDecomposition:
    j: int
    k: int
    r: int
    s: int
    t: int
    case: str
    RU: CircleInterval
    measure: Fraction


@dataclass(frozen=True)
class JIndex:
    i: int
    b: int
    start: int
    stop: int
    in_partition: bool = True  ## False for J^i_2 when a_{i+1} = 1 (it repeats J^{i+1}_1)

    @property
    def t(self) -> int:
        return self.b - 1

    def __len__(self) -> int:
        return self.stop - self.start

    def __contains__(self, j: int) -> bool:
        return self.start <= j < self.stop


@dataclass(frozen=True)
class CountReport:
    x: Fraction
    N: int
    count: int
    measure_sum: Fraction


@dataclass(frozen=True)
class BoundsCheck:
    n: int
    value: Fraction
    lower: Fraction
    upper: Fraction
    lower_ok: bool
    upper_ok: bool

    @property
    def ok(self) -> bool:
        return self.lower_ok and self.upper_ok


def _arc(alpha: Alpha, k: int, t: int) -> Tuple[CircleInterval, Fraction, str]:
    """R(U_j) for r = q_k, s = q_{k-1} and the given t, with its measure and case."""
    e_r = signed_error(alpha, k)
    e_s = signed_error(alpha, k - 1)
    low, high = sorted((e_r, e_s + t * e_r))
    measure = theta(alpha, k) + theta(alpha, k - 1) - t * theta(alpha, k)
    if high - low != measure or measure <= 0:
        raise VerificationError(f"degenerate target arc at k={k}, t={t}: {low}, {high}")
    case = BELOW_HALF if e_r > 0 else ABOVE_HALF
    return CircleInterval(frac_part(low), measure), measure, case


def rst(alpha: Alpha, j: int) -> TargetDecomposition:
    if j < 1:
        raise DomainError(f"targets are indexed from j=1, got {j}")
    if j > alpha.horizon_j:
        raise HorizonError(f"time {j} beyond horizon_j={alpha.horizon_j}")
    k = alpha.index_of_time(j)
    r, s = alpha.q(k), alpha.q(k - 1)
    t = (j - s) // r
    if t >= alpha.a(k + 1):
        raise VerificationError(f"t={t} not below a_{k + 1}={alpha.a(k + 1)} at j={j}")
    ru, measure, case = _arc(alpha, k, t)
    return TargetDecomposition(j, k, r, s, t, case, ru, measure)


def target_RU(alpha: Alpha, j: int) -> CircleInterval:
    return rst(alpha, j).RU


def V_interval(alpha: Alpha, j: int) -> CircleInterval:
    if j + 1 > alpha.horizon_j:
        raise HorizonError(f"V_{j} needs j+1 <= horizon_j={alpha.horizon_j}")
    return rst(alpha, j).RU.rotate(-(j + 1) * alpha.value)


def measure_V(alpha: Alpha, j: int) -> Fraction:
    return rst(alpha, j).measure


def j_index(alpha: Alpha, i: int, b: int) -> JIndex:
    """J^i_b; b = 1 gives [q_i, q_i + q_{i-1}), b >= 2 gives [q_{i-1} + (b-1)q_i, q_{i-1} + b*q_i)."""
    if i < 0 or b < 1:
        raise DomainError(f"no block J^{i}_{b}")
    q_i, q_prev = alpha.q(i), alpha.q(i - 1)
    a_next = alpha.a(i + 1)
    if b == 1:
        return JIndex(i, 1, q_i, q_i + q_prev)
    if b > 2 and b > a_next:
        raise DomainError(f"J^{i}_{b} needs b <= a_{i + 1}={a_next}")
    start = q_prev + (b - 1) * q_i
    return JIndex(i, b, start, start + q_i, in_partition=b <= a_next)


def _partition_blocks(alpha: Alpha, up_to: int) -> Iterator[JIndex]:
    """Non-empty J^i_b, b <= a_{i+1}, in time order, until one starts past up_to."""
    for i in range(alpha.horizon_k):
        if alpha.q(i) > up_to:
            return
        for b in range(1, alpha.a(i + 1) + 1):
            block = j_index(alpha, i, b)
            if block.start > up_to:
                return
            if len(block):
                yield block


def _check_disjoint(blocks: List[JIndex], label: str):
    ordered = sorted(blocks, key=lambda blk: blk.start)
    for left, right in zip(ordered, ordered[1:]):
        if left.stop > right.start:
            raise VerificationError(f"{label} blocks overlap: {left} and {right}")


def j_intervals(alpha: Alpha, up_to: int) -> List[JIndex]:
    """All J^i_b inside [1, up_to], plus J^i_2 where a_{i+1} = 1 (flagged in_partition=False)."""
    if up_to > alpha.horizon_j:
        raise HorizonError(f"up_to={up_to} beyond horizon_j={alpha.horizon_j}")
    blocks = [blk for blk in _partition_blocks(alpha, up_to) if blk.stop - 1 <= up_to]
    h_family = []
    for i in range(alpha.horizon_k):
        blk = j_index(alpha, i, 2)
        if blk.stop - 1 > up_to:
            break
        h_family.append(blk)
    _check_disjoint(blocks, "partition")
    _check_disjoint(h_family, "J^i_2")
    return blocks + [blk for blk in h_family if not blk.in_partition]


def _block_arc(alpha: Alpha, block: JIndex) -> Tuple[CircleInterval, Fraction]:
    ru, measure, _ = _arc(alpha, block.i, block.t)
    return ru, measure


def block_union(alpha: Alpha, block: JIndex) -> IntervalSet:
    """Union of V_j over j in the block; the arcs are pairwise disjoint."""
    if block.stop > alpha.horizon_j:
        raise HorizonError(f"block {block} reaches past horizon_j={alpha.horizon_j}")
    ru, _ = _block_arc(alpha, block)
    return IntervalSet.from_arcs(ru.rotate(-(j + 1) * alpha.value) for j in range(block.start, block.stop))


def _generic_hits(alpha: Alpha, x: Fraction, block: JIndex, stop: int) -> int:
    # x in V_j  <=>  {x + (j+1)alpha} in R(U_j)
    ru, _ = _block_arc(alpha, block)
    return count_progression_hits(x + (block.start + 1) * alpha.value, alpha.value, stop - block.start, ru)


@lru_cache(maxsize=64)
def _sorted_anchors(alpha: Alpha, i: int) -> Tuple[int, ...]:
    """Residues of {-(u+1)alpha}, u < q_i, scaled by the denominator of alpha, sorted."""
    num, den = alpha.value.numerator, alpha.value.denominator
    logger.debug(f"sorting {alpha.q(i)} anchors for block i={i}")
    return tuple(sorted((-(u + 1) * num) % den for u in range(alpha.q(i))))


def anchored_block_count(alpha: Alpha, x: Fraction, i: int, b_max: int) -> int:
    """#{(j, b) : 2 <= b <= b_max, j in J^i_b, x in V_j} from the nearest anchor of x.

    Every V_j with j = q_{i-1} + (b-1)q_i + u has one endpoint at {-(u+1)alpha}
    (its start when e_i > 0, its end otherwise) and length
    theta_{i-1} - (b-2)theta_i, so x meets the sets of a whole run of b
    through the single anchor next to it.
    """
    if b_max < 2:
        return 0
    if b_max > alpha.a(i + 1):
        raise DomainError(f"b_max={b_max} exceeds a_{i + 1}={alpha.a(i + 1)}")
    anchors = _sorted_anchors(alpha, i)
    den = alpha.value.denominator
    x = frac_part(Fraction(x))
    pos = bisect_right(anchors, floor(x * den))
    e_i = signed_error(alpha, i)
    step = abs(e_i)
    longest = theta(alpha, i - 1)
    cap = b_max - 1
    if e_i > 0:
        d = frac_part(x - Fraction(anchors[pos - 1], den))
        if d >= longest:
            return 0
        return min(ceil((longest - d) / step), cap)
    d = frac_part(Fraction(anchors[pos % len(anchors)], den) - x) or Fraction(1)
    if d > longest:
        return 0
    return min(floor((longest - d) / step) + 1, cap)


def _full_branches(alpha: Alpha, i: int, N: int) -> int:
    """Largest b with J^i_b (b >= 2) ending at or before N, capped at a_{i+1}."""
    return min(alpha.a(i + 1), (N + 1 - alpha.q(i - 1)) // alpha.q(i))


def count_hits(alpha: Alpha, x: Fraction, N: int) -> int:
    """#{1 <= j <= N : x in V_j}."""
    x = frac_part(Fraction(x))
    count = 0
    for i in range(alpha.horizon_k):
        if alpha.q(i) > N:
            break
        if i >= 1:
            first = j_index(alpha, i, 1)
            count += _generic_hits(alpha, x, first, min(first.stop, N + 1))
        b_full = _full_branches(alpha, i, N)
        if b_full >= 3 and alpha.q(i) <= settings.anchor_limit:
            count += anchored_block_count(alpha, x, i, b_full)
        else:
            for b in range(2, b_full + 1):
                block = j_index(alpha, i, b)
                count += _generic_hits(alpha, x, block, block.stop)
        tail_b = max(b_full, 1) + 1
        if tail_b <= alpha.a(i + 1):
            block = j_index(alpha, i, tail_b)
            if block.start <= N:
                count += _generic_hits(alpha, x, block, N + 1)
    return count


def measure_sum(alpha: Alpha, N: int) -> Fraction:
    """Sum of lambda(V_j) for 1 <= j <= N, in closed form per block."""
    if N > alpha.horizon_j:
        raise HorizonError(f"N={N} beyond horizon_j={alpha.horizon_j}")
    total = Fraction(0)
    for i in range(alpha.horizon_k):
        if alpha.q(i) > N:
            break
        th, th_prev, q_i = theta(alpha, i), theta(alpha, i - 1), alpha.q(i)
        if i >= 1:
            first = j_index(alpha, i, 1)
            total += (min(first.stop, N + 1) - first.start) * (th + th_prev)
        b_full = _full_branches(alpha, i, N)
        if b_full >= 2:
            ### sum over b = 2..B of q_i (theta_{i-1} - (b-2) theta_i)
            total += q_i * ((b_full - 1) * th_prev - th * ((b_full - 2) * (b_full - 1) // 2))
        tail_b = max(b_full, 1) + 1
        if tail_b <= alpha.a(i + 1):
            block = j_index(alpha, i, tail_b)
            if block.start <= N:
                total += (N + 1 - block.start) * (th_prev - (tail_b - 2) * th)
    return total


def count_undetermined(alpha: Alpha, x: Fraction, N: int) -> CountReport:
    if N + 1 > alpha.horizon_j:
        raise HorizonError(f"count up to N={N} needs N+1 <= horizon_j={alpha.horizon_j}")
    x = frac_part(Fraction(x))
    if N < 1:
        return CountReport(x, N, 0, Fraction(0))
    return CountReport(x, N, count_hits(alpha, x, N), measure_sum(alpha, N))


def per_j_rows(alpha: Alpha, N: int, x: Optional[Fraction] = None) -> List[Dict[str, object]]:
    """One row per time j <= N with its block, (r, s, t), lambda(V_j) and, given x, chi."""
    if N + 1 > alpha.horizon_j:
        raise HorizonError(f"N={N} needs N+1 <= horizon_j={alpha.horizon_j}")
    rows = []
    for block in _partition_blocks(alpha, N):
        ru, measure = _block_arc(alpha, block)
        r, s = alpha.q(block.i), alpha.q(block.i - 1)
        for j in range(block.start, min(block.stop, N + 1)):
            row = {
                "j": j, "i": block.i, "b": block.b, "r": r, "s": s, "t": block.t,
                "lambda_num": str(measure.numerator), "lambda_den": str(measure.denominator),
            }
            if x is not None:
                row["chi"] = int(ru.contains(Fraction(x) + (j + 1) * alpha.value))
            rows.append(row)
    return rows


def setwise_bounds_check(alpha: Alpha, n: int) -> BoundsCheck:
    """(n-2)/2 < sum_{j < q_n} lambda(V_j) < a_1 + ... + a_n."""
    if not (1 <= n <= alpha.horizon_k):
        raise HorizonError(f"n={n} outside 1..{alpha.horizon_k}")
    value = measure_sum(alpha, alpha.q(n) - 1)
    lower = Fraction(n - 2, 2)
    upper = Fraction(sum(alpha.cf.elements[:n]))
    return BoundsCheck(n, value, lower, upper, value > lower, value < upper)


def pointwise_bounds_check(alpha: Alpha, x: Fraction, n: int) -> BoundsCheck:
    """(n-2)/4 < #{j < q_n : x in V_j} <= a_1 + ... + a_n; the lower side holds for almost every x."""
    if not (1 <= n < alpha.horizon_k):
        raise HorizonError(f"n={n} outside 1..{alpha.horizon_k - 1}")
    count = count_hits(alpha, x, alpha.q(n) - 1)
    lower = Fraction(n - 2, 4)
    upper = Fraction(sum(alpha.cf.elements[:n]))
    return BoundsCheck(n, Fraction(count), lower, upper, count > lower, count <= upper)
