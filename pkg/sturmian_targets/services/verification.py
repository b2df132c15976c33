"""The `verify` suites: every exact invariant of the targets, checked against
brute force or against its closed form, per alpha."""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from sturmian_targets.api.schemas import SuiteResult
from sturmian_targets.config.settings import settings
from sturmian_targets.models.cf_core import Alpha, cylinder_ratio_check
from sturmian_targets.models.errors import SturmianError
from sturmian_targets.models.intervals import CircleInterval
from sturmian_targets.models.rotation_coder import (
    atom_codings,
    atoms,
    code,
    is_right_special,
    oracle_V,
    oracle_V_by_cut,
    right_special_prefix_count,
    right_special_word,
)
from sturmian_targets.models.targets import (
    V_interval,
    block_union,
    count_undetermined,
    j_index,
    j_intervals,
    measure_V,
    pointwise_bounds_check,
    setwise_bounds_check,
)
from sturmian_targets.services.experiments import (
    decay_check,
    h_integral,
    h_pair_integral,
    kesten_count,
    quasi_independence_check,
    quasi_independence_union,
)
from sturmian_targets.services.runner import Runner
from sturmian_targets.services.sampling import substream, uniform_point

MAX_DETAIL = 5


class _Tally:
    def __init__(self, name: str, alpha: Alpha):
        self.result = SuiteResult(name=name)
        self.alpha = alpha

    def check(self, ok: bool, what: str, vacuous: bool = False):
        self.result.checks += 1
        if vacuous:
            self.result.vacuous += 1
        if not ok:
            self.result.failures += 1
            if len(self.result.detail) < MAX_DETAIL:
                self.result.detail.append(f"{self.alpha.spec}: {what}")


class VerificationService:
    """Runs the named suites over a list of alpha; each suite is (alpha, rng) -> SuiteResult."""

    def __init__(self, oracle_max: Optional[int] = None, kesten_draws: int = 1000, qi_draws: int = 200):
        self.oracle_max = oracle_max or settings.oracle_max
        self.kesten_draws = kesten_draws
        self.qi_draws = qi_draws
        self.suites: Dict[str, Callable[[Alpha, np.random.Generator], SuiteResult]] = {
            "oracle_equivalence": self.oracle_equivalence,
            "atoms_complexity": self.atoms_complexity,
            "disjointness": self.disjointness,
            "sum_bounds": self.sum_bounds,
            "h_integrals": self.h_integrals,
            "nesting": self.nesting,
            "kesten": self.kesten,
            "quasi_independence": self.quasi_independence,
            "union_independence": self.union_independence,
            "h_pairs": self.h_pairs,
            "symbolic_count": self.symbolic_count,
            "cylinder": self.cylinder,
        }

    def _last_time(self, alpha: Alpha) -> int:
        return min(self.oracle_max, alpha.horizon_j - 1)

    def oracle_equivalence(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("oracle_equivalence", alpha)
        for j in range(1, self._last_time(alpha) + 1):
            closed = V_interval(alpha, j)
            tally.check(closed == oracle_V(alpha, j), f"V_{j} differs from the partition oracle")
            tally.check(closed == oracle_V_by_cut(alpha, j), f"V_{j} differs from the cut oracle")
        return tally.result

    def atoms_complexity(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("atoms_complexity", alpha)
        last = min(self._last_time(alpha), 200)
        for j in range(0, last):
            words = atom_codings(alpha, j)
            tally.check(len(atoms(alpha, j).atoms) == j + 2, f"step {j} has the wrong atom count")
            tally.check(len(words) == j + 2, f"step {j} codings are not distinct")
            tally.check(is_right_special(alpha, right_special_word(alpha, j)), f"step {j} right-special word")
        length = min(alpha.horizon_j, 4 * last + 8)
        x = uniform_point(rng)
        orbit = code(alpha, x, length)
        for m in (1, 2, 3, 5, 8):
            if m <= last:
                tally.check(orbit.windows(m) <= atom_codings(alpha, m - 1), f"length-{m} window outside the atoms")
        return tally.result

    def disjointness(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("disjointness", alpha)
        up_to = min(alpha.horizon_j, self.oracle_max)
        try:
            blocks = j_intervals(alpha, up_to)
        except SturmianError as e:
            tally.check(False, str(e))
            return tally.result
        for block in blocks:
            if block.stop > alpha.horizon_j:
                continue
            union = block_union(alpha, block)
            expected = len(block) * measure_V(alpha, block.start)
            tally.check(union.measure() == expected, f"J^{block.i}_{block.b} sets overlap")
        return tally.result

    def sum_bounds(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("sum_bounds", alpha)
        for n in range(1, alpha.horizon_k + 1):
            report = setwise_bounds_check(alpha, n)
            tally.check(report.ok, f"measure sum at q_{n}: {report.value} vs ({report.lower}, {report.upper})")
        x = uniform_point(rng)
        for n in range(1, alpha.horizon_k):
            report = pointwise_bounds_check(alpha, x, n)
            ### the lower side is an almost-everywhere statement, only the upper side is exact
            tally.check(report.upper_ok, f"count at q_{n} for x={x} above {report.upper}")
        return tally.result

    def _h_indices(self, alpha: Alpha) -> List[int]:
        indices = []
        for i in range(1, alpha.horizon_k):
            if j_index(alpha, i, 2).stop > alpha.horizon_j:
                break
            indices.append(i)
        return indices

    def h_integrals(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("h_integrals", alpha)
        for i in self._h_indices(alpha):
            stat = h_integral(alpha, i, with_support=alpha.q(i) <= self.oracle_max)
            tally.check(stat.ok, f"h_{i} integral {stat.integral.approx}")
        return tally.result

    def nesting(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("nesting", alpha)
        last = self._last_time(alpha)
        for k in range(0, alpha.horizon_k):
            q_k, q_next = alpha.q(k), alpha.q(k + 1)
            for j in range(max(q_k, 1), q_next - q_k + 1):
                if j + q_k > last:
                    break
                inner = V_interval(alpha, j + q_k).to_set()
                tally.check(inner.is_subset(V_interval(alpha, j).to_set()), f"V_{j + q_k} not inside V_{j}")
            if q_next > last:
                break
        return tally.result

    def _random_block(self, alpha: Alpha, rng: np.random.Generator, indices: Sequence[int]):
        i = int(indices[rng.integers(len(indices))])
        low = 2 if i == 0 else 1
        b = int(rng.integers(low, min(alpha.a(i + 1), 2**62) + 1))
        return i, b

    def kesten(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("kesten", alpha)
        indices = [i for i in range(alpha.horizon_k - 1) if i > 0 or alpha.a(1) >= 2]
        if not indices:
            return tally.result
        for _ in range(self.kesten_draws):
            i, b = self._random_block(alpha, rng, indices)
            arc = CircleInterval(uniform_point(rng, 64), uniform_point(rng, 64))
            result = kesten_count(alpha, arc, i, b)
            tally.check(result.ok, f"J^{i}_{b}: {result.count} points vs {result.expected.approx}")
        return tally.result

    def quasi_independence(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("quasi_independence", alpha)
        indices = [i for i in range(1, alpha.horizon_k - 1) if alpha.q(i - 1) > 3 and alpha.q(i) <= self.oracle_max]
        if not indices:
            return tally.result
        lambdas = [measure_V(alpha, k) for k in range(1, max(alpha.q(i) for i in indices))]
        vacuous = 0
        for _ in range(self.qi_draws):
            i, b = self._random_block(alpha, rng, indices)
            size = len(j_index(alpha, i, b))
            ### k < q_i drawn among the times whose bound says something, when there are any
            informative = [k for k in range(1, alpha.q(i)) if lambdas[k - 1] * size > 3]
            if informative:
                k = informative[int(rng.integers(len(informative)))]
            else:
                k = int(rng.integers(1, alpha.q(i)))
            report = quasi_independence_check(alpha, k, i, b)
            value = Fraction(int(report.value.num), int(report.value.den))
            vacuous += report.vacuous
            tally.check(report.ok, f"V_{k} against J^{i}_{b}: {report.value.approx}", vacuous=report.vacuous)
            tally.check(value <= lambdas[k - 1], f"V_{k} against J^{i}_{b} exceeds lambda(V_{k})")
        tally.check(vacuous <= 0.3 * self.qi_draws, f"{vacuous} of {self.qi_draws} draws were vacuous")
        return tally.result

    def union_independence(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("union_independence", alpha)
        indices = [i for i in range(1, alpha.horizon_k - 1) if alpha.q(i + 1) <= self.oracle_max]
        for i in indices:
            for j in indices:
                if j <= i:
                    continue
                _, b_prime = self._random_block(alpha, rng, [i])
                _, b = self._random_block(alpha, rng, [j])
                report = quasi_independence_union(alpha, i, b_prime, j, b)
                tally.check(report.ok, f"J^{i}_{b_prime} against J^{j}_{b}: {report.value.approx}",
                            vacuous=report.vacuous)
        return tally.result

    def h_pairs(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("h_pairs", alpha)
        indices = [i for i in self._h_indices(alpha) if alpha.q(i) <= self.oracle_max]
        for i in indices:
            for j in indices:
                if j <= i:
                    continue
                if j < i + 4:
                    ### only the decay statement covers neighbouring indices
                    tally.check(decay_check(alpha, i, j), f"h_{i} h_{j} decays too slowly")
                    continue
                stat = h_pair_integral(alpha, i, j)
                ok = (stat.vacuous or stat.within_bounds) and stat.decay_ok
                tally.check(ok, f"h_{i} h_{j} = {stat.value.approx} vs {stat.product.approx}", vacuous=stat.vacuous)
        return tally.result

    def symbolic_count(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("symbolic_count", alpha)
        N = min(self._last_time(alpha), 300)
        for _ in range(3):
            x = uniform_point(rng)
            closed = count_undetermined(alpha, x, N).count
            tally.check(right_special_prefix_count(alpha, x, N) == closed, f"hit count of x={x} up to {N}")
        return tally.result

    def cylinder(self, alpha: Alpha, rng: np.random.Generator) -> SuiteResult:
        tally = _Tally("cylinder", alpha)
        elements = alpha.cf.elements
        for n in range(1, min(len(elements), 30) + 1):
            tally.check(cylinder_ratio_check(elements[:n]), f"cylinder ratios for the first {n} elements")
        return tally.result

    def _run_alpha(self, alpha: Alpha, index: int, seed: int) -> List[SuiteResult]:
        results = []
        for offset, (name, suite) in enumerate(self.suites.items()):
            rng = substream(seed, 1000 * index + offset)
            try:
                results.append(suite(alpha, rng))
            except SturmianError as e:
                logger.error(f"suite {name} aborted on {alpha.spec}: {e}")
                results.append(SuiteResult(name=name, checks=1, failures=1, detail=[f"{alpha.spec}: {e}"]))
        return results

    def run(self, alphas: Sequence[Alpha], seed: int = 0, jobs: Optional[int] = None) -> List[SuiteResult]:
        logger.info(f"running {len(self.suites)} suites over {len(alphas)} alpha")
        per_alpha = Runner(jobs).map(lambda item: self._run_alpha(item[1], item[0], seed), list(enumerate(alphas)))
        merged: Dict[str, SuiteResult] = {name: SuiteResult(name=name) for name in self.suites}
        for results in per_alpha:
            for result in results:
                total = merged[result.name]
                total.checks += result.checks
                total.failures += result.failures
                total.vacuous += result.vacuous
                total.detail.extend(result.detail[:MAX_DETAIL - len(total.detail)])
        for total in merged.values():
            if total.passed:
                logger.info(f"{total.name}: {total.checks} checks passed ({total.vacuous} vacuous)")
            else:
                logger.error(f"{total.name}: {total.failures} of {total.checks} checks failed")
        return list(merged.values())


def run_suites(alphas: Sequence[Alpha], oracle_max: Optional[int] = None, seed: int = 0,
               jobs: Optional[int] = None) -> List[SuiteResult]:
    return VerificationService(oracle_max).run(alphas, seed, jobs)
