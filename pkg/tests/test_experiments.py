from fractions import Fraction as F

import pytest

from sturmian_targets.api.schemas import ThmBConfig
from sturmian_targets.models.cf_core import theta
from sturmian_targets.models.errors import DomainError
from sturmian_targets.models.intervals import CircleInterval
from sturmian_targets.services.experiments import (
    decay_check,
    h_integral,
    h_pair_integral,
    kesten_count,
    log_ratio,
    median_distance_from_one,
    quasi_independence_check,
    quasi_independence_union,
    theorem_a_ratio,
    theorem_a_sweep,
    theorem_b_experiment,
    theorem_b_oscillation,
    w_closed_form,
    w_set,
    x_y_sets,
)


def as_fraction(out):
    return F(int(out.num), int(out.den))


def test_log_ratio_edges():
    assert log_ratio(1, F(10)) is None
    assert log_ratio(5, F(1)) is None
    assert float(log_ratio(100, F(100))) == pytest.approx(1.0)
    assert float(log_ratio(8, F(2))) == pytest.approx(3.0)


def test_ratio_series_on_golden(golden):
    series = theorem_a_ratio(golden, F(1, 3), [golden.q(15) - 1, golden.q(30) - 1])
    first, last = series.points
    assert (first.n, last.n) == (15, 30)
    assert first.setwise_ok and last.setwise_ok
    assert last.pointwise_ok
    assert 0.7 < float(last.ratio) < 1.3


def test_ratio_is_undefined_for_tiny_counts(golden):
    series = theorem_a_ratio(golden, F(1, 3), [1])
    assert series.points[0].count == 1
    assert series.points[0].ratio is None


def test_sweep_is_seeded(golden):
    checkpoints = [golden.q(6) - 1, golden.q(9) - 1]
    one = theorem_a_sweep(golden, checkpoints, samples=4, seed=5, jobs=1)
    many = theorem_a_sweep(golden, checkpoints, samples=4, seed=5, jobs=3)
    assert [s.model_dump() for s in one] == [s.model_dump() for s in many]


def test_ratio_approaches_one_over_many_points(golden):
    checkpoints = [golden.q(n) - 1 for n in (15, 20, 25, 30)]
    sweep = theorem_a_sweep(golden, checkpoints, samples=100, seed=0)
    bounded = sum(all(p.pointwise_ok and p.setwise_ok for p in s.points) for s in sweep)
    assert bounded >= 95
    early, late = median_distance_from_one(sweep, 0), median_distance_from_one(sweep, 3)
    assert late < early
    assert late <= 0.25


def test_h_integral_on_golden(golden):
    stat = h_integral(golden, 4, with_support=True)
    assert as_fraction(stat.integral) == 5 * theta(golden, 3)
    assert float(as_fraction(stat.integral)) == pytest.approx(0.7295, abs=1e-4)
    assert stat.ok
    assert 1 <= stat.pieces <= 5
    assert h_integral(golden, 1).ok
    with pytest.raises(DomainError):
        h_integral(golden, 0)


def test_h_pair_within_bounds(golden):
    stat = h_pair_integral(golden, 3, 10)
    value = as_fraction(stat.value)
    assert not stat.vacuous
    assert stat.within_bounds and stat.decay_ok
    assert 0 <= value <= min(as_fraction(h_integral(golden, 3).integral), as_fraction(h_integral(golden, 10).integral))


def test_adjacent_h_pair_is_vacuous(golden):
    assert h_pair_integral(golden, 5, 6).vacuous
    with pytest.raises(DomainError):
        h_pair_integral(golden, 6, 6)


def test_decay_holds_near_and_far(golden):
    assert decay_check(golden, 3, 4)
    assert decay_check(golden, 3, 10)
    assert decay_check(golden, 2, 12) == h_pair_integral(golden, 2, 12).decay_ok


def test_kesten_on_golden(golden):
    result = kesten_count(golden, CircleInterval(F(0), F(1, 2)), 4, 1)
    assert result.count == 1
    assert as_fraction(result.expected) == F(3, 2)
    assert result.ok
    assert kesten_count(golden, CircleInterval.full(), 6, 1).count == golden.q(5)
    assert kesten_count(golden, CircleInterval(F(1, 3), F(0)), 6, 1).count == 0


def test_kesten_on_many_branches(spiky):
    for b in range(1, spiky.a(6) + 1):
        for start in (F(0), F(1, 7), F(5, 9)):
            assert kesten_count(spiky, CircleInterval(start, F(2, 11)), 5, b).ok


def test_quasi_independence_on_golden(golden):
    report = quasi_independence_check(golden, 3, 8, 1)
    assert not report.vacuous
    assert report.ok
    assert as_fraction(report.lower) <= as_fraction(report.value) <= as_fraction(report.upper)
    with pytest.raises(DomainError):
        quasi_independence_check(golden, 40, 5, 1)


def test_quasi_independence_with_branches(spiky):
    for b in range(1, spiky.a(6) + 1):
        assert quasi_independence_check(spiky, 4, 5, b).ok


def test_union_quasi_independence_on_golden(golden):
    report = quasi_independence_union(golden, 3, 1, 8, 1)
    assert not report.vacuous
    assert report.ok
    assert as_fraction(report.lower) <= as_fraction(report.value) <= as_fraction(report.upper)
    with pytest.raises(DomainError):
        quasi_independence_union(golden, 5, 1, 5, 1)


def test_union_is_the_sum_over_the_inner_block(golden):
    report = quasi_independence_union(golden, 3, 1, 8, 1)
    ### J^3_1 = {3, 4}, and their V_k are disjoint
    by_k = [quasi_independence_check(golden, k, 8, 1) for k in (3, 4)]
    assert as_fraction(report.value) == sum(as_fraction(r.value) for r in by_k)
    assert as_fraction(report.lower) == sum(as_fraction(r.lower) for r in by_k)


def test_union_quasi_independence_with_branches(spiky):
    for b_prime in range(1, spiky.a(3) + 1):
        for b in range(1, spiky.a(6) + 1, 3):
            assert quasi_independence_union(spiky, 2, b_prime, 5, b).ok


def test_w_sets_follow_closed_form(two_huge):
    previous = None
    for b in range(2, 201, 11):
        current = w_set(two_huge, 4, b)
        assert current.measure() == w_closed_form(two_huge, 4, b)
        if previous is not None:
            assert current.is_subset(previous)
        previous = current


def test_x_and_y_sets(two_huge):
    X, Y, scale = x_y_sets(two_huge, ThmBConfig(m=4, C=F(20)))
    assert scale == {"a_m": 200, "rho_a": 40, "sigma_a": 20}
    assert X.measure() >= F(1, 4)
    assert Y.measure() >= F(1, 128)
    assert X.is_disjoint(Y)


def test_witness_condition_is_enforced(two_huge):
    with pytest.raises(DomainError):
        x_y_sets(two_huge, ThmBConfig(m=4, C=F(1000)))


def test_gap_on_small_witness(two_huge):
    report = theorem_b_experiment(two_huge, ThmBConfig(m=4, C=F(20)), samples=8, seed=2)
    assert report.ok
    assert report.nested
    assert all(check.ok for check in report.w_checks)
    assert all(pair.block_x >= 39 and pair.block_y <= 19 for pair in report.pairs)
    assert F(report.min_gap) > 0


def test_gap_on_default_witness(witness):
    report = theorem_b_experiment(witness, ThmBConfig(m=11), samples=5, seed=0)
    assert report.a_m == 100_000
    assert report.ok
    assert float(as_fraction(report.lambda_X)) == pytest.approx(0.8, abs=0.01)
    assert as_fraction(report.lambda_Y) >= F(1, 128)
    assert as_fraction(report.gap_lower) == (F(1, 5) - F(1, 10) - F(1, 1000)) / (1 + F(1, 1000))


def test_oscillation_between_two_huge_elements():
    report = theorem_b_oscillation()
    assert report.ok
    assert float(report.f_m1) > float(report.f_m2)
