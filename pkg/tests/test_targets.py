from fractions import Fraction as F

import pytest

from sturmian_targets.models.cf_core import make_alpha, theta
from sturmian_targets.models.errors import DomainError, HorizonError
from sturmian_targets.models.intervals import CircleInterval, IntervalSet, frac_part
from sturmian_targets.models.rotation_coder import oracle_V, rotate
from sturmian_targets.models.targets import (
    _generic_hits,
    ABOVE_HALF,
    BELOW_HALF,
    anchored_block_count,
    count_hits,
    count_undetermined,
    j_index,
    j_intervals,
    measure_V,
    measure_sum,
    per_j_rows,
    pointwise_bounds_check,
    rst,
    setwise_bounds_check,
    target_RU,
    V_interval,
)


@pytest.mark.parametrize("j, r, s, t", [(6, 5, 3, 0), (8, 8, 5, 0), (12, 8, 5, 0), (13, 13, 8, 0)])
def test_rst_on_golden(golden, j, r, s, t):
    dec = rst(golden, j)
    assert (dec.r, dec.s, dec.t) == (r, s, t)


def test_rst_below_one_with_large_first_element(spiky):
    dec = rst(spiky, 2)
    assert (dec.r, dec.s, dec.t) == (1, 0, 2)
    with pytest.raises(DomainError):
        rst(spiky, 0)


def test_golden_target_arc(golden):
    ru = target_RU(golden, 6)
    assert ru == CircleInterval(frac_part(3 * golden.value), theta(golden, 3) + theta(golden, 4))
    assert ru.contains(F(0))
    assert rst(golden, 6).case == BELOW_HALF
    assert float(ru.length) == pytest.approx(0.236068, abs=1e-6)


def test_small_prefix_target_arc():
    alpha = make_alpha([2, 2])
    dec = rst(alpha, 2)
    assert (dec.r, dec.s, dec.t) == (2, 1, 0)
    assert dec.case == ABOVE_HALF
    assert dec.RU.start == frac_part(2 * alpha.value)
    assert dec.RU.end == alpha.value


def test_closed_form_matches_partition_oracle(small_alphas):
    for alpha in small_alphas:
        for j in range(1, min(600, alpha.horizon_j - 1)):
            assert V_interval(alpha, j) == oracle_V(alpha, j)
            assert V_interval(alpha, j).length == measure_V(alpha, j)


def test_horizon_contract(golden, two_fifths):
    with pytest.raises(HorizonError):
        V_interval(golden, golden.horizon_j)
    with pytest.raises(HorizonError):
        measure_sum(two_fifths, 5)


def test_h_family_measure(twos, spiky, pattern):
    for alpha in (twos, spiky, pattern):
        for i in range(1, 6):
            block = j_index(alpha, i, 2)
            for j in range(block.start, block.stop):
                assert measure_V(alpha, j) == theta(alpha, i - 1)


def test_measure_drops_by_theta_across_branches(spiky):
    for b in range(2, 12):
        here, there = j_index(spiky, 5, b), j_index(spiky, 5, b + 1)
        assert measure_V(spiky, here.start) - measure_V(spiky, there.start) == theta(spiky, 5)


def test_j_intervals_on_golden(golden):
    blocks = j_intervals(golden, 13)
    partition = [(blk.i, blk.b, blk.start, blk.stop) for blk in blocks if blk.in_partition]
    assert partition == [(1, 1, 1, 2), (2, 1, 2, 3), (3, 1, 3, 5), (4, 1, 5, 8), (5, 1, 8, 13)]
    extra = [(blk.start, blk.stop) for blk in blocks if not blk.in_partition]
    assert extra == [(1, 2), (2, 3), (3, 5), (5, 8), (8, 13)]


def test_j_intervals_with_three_branches():
    alpha = make_alpha([1, 3])
    partition = [(blk.i, blk.b, blk.start, blk.stop) for blk in j_intervals(alpha, 3) if blk.in_partition]
    assert partition == [(1, 1, 1, 2), (1, 2, 2, 3), (1, 3, 3, 4)]


def test_blocks_tile_times(spiky):
    blocks = [blk for blk in j_intervals(spiky, 5000) if blk.in_partition]
    assert blocks[0].start == 1
    for left, right in zip(blocks, blocks[1:]):
        assert left.stop == right.start


def test_targets_disjoint_within_a_block(twos, spiky, pattern):
    for alpha in (twos, spiky, pattern):
        for blk in j_intervals(alpha, min(3000, alpha.horizon_j - 1)):
            if len(blk) > 400:
                continue
            arcs = [V_interval(alpha, j) for j in range(blk.start, blk.stop)]
            assert IntervalSet.from_arcs(arcs).measure() == sum(arc.length for arc in arcs)


def test_count_matches_brute_force(golden, spiky):
    cases = [(golden, 80), (spiky, 1500), (make_alpha([1, 3, 40, 2, 1, 30, 1, 1]), 2000)]
    for alpha, N in cases:
        arcs = [V_interval(alpha, j) for j in range(1, N + 1)]
        points = [F(1, 3), F(7, 997), F(500, 997), F(996, 997), rotate(alpha, F(0), -5), rotate(alpha, F(0), -2)]
        for x in points:
            report = count_undetermined(alpha, x, N)
            assert report.count == sum(arc.contains(x) for arc in arcs)
            assert report.measure_sum == sum(arc.length for arc in arcs)


def test_count_on_partial_last_block(spiky):
    for N in (35, 60, 200, 700):
        arcs = [V_interval(spiky, j) for j in range(1, N + 1)]
        assert count_hits(spiky, F(2, 7), N) == sum(arc.contains(F(2, 7)) for arc in arcs)


def test_anchored_count_agrees_with_per_branch_count(spiky):
    for i in (2, 5):
        for b_max in (2, 5, spiky.a(i + 1)):
            for k in range(40):
                x = F(k * 37 + 1, 1499)
                expected = sum(
                    _generic_hits(spiky, x, j_index(spiky, i, b), j_index(spiky, i, b).stop)
                    for b in range(2, b_max + 1)
                )
                assert anchored_block_count(spiky, x, i, b_max) == expected


def test_empty_count(golden):
    assert count_undetermined(golden, F(1, 3), 0).count == 0


def test_measure_sum_small_prefix():
    alpha = make_alpha([2, 2])
    assert measure_sum(alpha, 4) == 2 + alpha.value


def test_measure_sum_golden_window(golden):
    total = measure_sum(golden, golden.q(10) - 1)
    assert 4 < total < 10
    assert setwise_bounds_check(golden, 10).ok


def test_measure_sum_monotone(spiky):
    sums = [measure_sum(spiky, N) for N in range(0, 200)]
    assert all(a < b for a, b in zip(sums, sums[1:]))


def test_setwise_bounds_every_index(small_alphas):
    for alpha in small_alphas:
        for m in range(1, alpha.horizon_k + 1):
            assert setwise_bounds_check(alpha, m).ok


def test_pointwise_upper_bound(golden, pattern):
    for alpha in (golden, pattern):
        for n in (5, 10, 20):
            assert pointwise_bounds_check(alpha, F(1, 3), n).upper_ok


def test_per_j_rows(golden):
    rows = per_j_rows(golden, 20, F(1, 3))
    assert [row["j"] for row in rows] == list(range(1, 21))
    assert sum(row["chi"] for row in rows) == count_hits(golden, F(1, 3), 20)
    assert rows[5]["r"] == 5 and rows[5]["s"] == 3 and rows[5]["t"] == 0
