from fractions import Fraction as F

from sturmian_targets.models.intervals import CircleInterval
from sturmian_targets.services import verification
from sturmian_targets.services.sampling import substream
from sturmian_targets.services.verification import VerificationService, run_suites


def test_all_suites_pass_on_fixed_alphas(golden, twos, spiky):
    service = VerificationService(oracle_max=150, kesten_draws=200, qi_draws=30)
    results = service.run([golden, twos, spiky], seed=0)
    assert len(results) >= 6
    for result in results:
        assert result.passed, result.detail
    by_name = {r.name: r for r in results}
    assert by_name["oracle_equivalence"].checks == 2 * 150 * 3
    assert by_name["kesten"].checks == 3 * 200
    assert by_name["h_pairs"].vacuous <= by_name["h_pairs"].checks


def test_results_do_not_depend_on_workers(golden, pattern):
    one = run_suites([golden, pattern], oracle_max=60, seed=3, jobs=1)
    many = run_suites([golden, pattern], oracle_max=60, seed=3, jobs=2)
    assert [r.model_dump() for r in one] == [r.model_dump() for r in many]


def test_broken_closed_form_is_reported(golden, monkeypatch):
    monkeypatch.setattr(verification, "V_interval", lambda alpha, j: CircleInterval(F(0), F(1, 2)))
    service = VerificationService(oracle_max=20)
    result = service.oracle_equivalence(golden, None)
    assert not result.passed
    assert result.failures > 0
    assert result.detail and result.detail[0].startswith("preset:golden-40")


def test_quasi_independence_draws_are_mostly_informative(golden, twos, spiky):
    service = VerificationService(oracle_max=150, qi_draws=40)
    for alpha in (golden, twos, spiky):
        result = service.quasi_independence(alpha, substream(0, 0))
        assert result.passed, result.detail
        assert result.vacuous <= 0.3 * 40
        union = service.union_independence(alpha, substream(0, 1))
        assert union.checks > 0
        assert union.passed, union.detail


def test_too_many_vacuous_draws_fail(golden, monkeypatch):
    real = verification.quasi_independence_check

    def always_vacuous(alpha, k, i, b):
        return real(alpha, k, i, b).model_copy(update={"vacuous": True})

    monkeypatch.setattr(verification, "quasi_independence_check", always_vacuous)
    result = VerificationService(oracle_max=60, qi_draws=10).quasi_independence(golden, substream(0, 0))
    assert not result.passed
    assert "vacuous" in result.detail[-1]
