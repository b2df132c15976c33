from fractions import Fraction

import pytest

from sturmian_targets.models.cf_core import make_alpha, parse_alpha


@pytest.fixture(scope="session")
def golden():
    return parse_alpha("preset:golden-40")


@pytest.fixture(scope="session")
def twos():
    return parse_alpha("preset:twos-30")


@pytest.fixture(scope="session")
def pattern():
    return parse_alpha("preset:pattern-123-30")


@pytest.fixture(scope="session")
def two_fifths():
    return make_alpha(Fraction(2, 5))


@pytest.fixture(scope="session")
def spiky():
    """Large elements at a few positions, so blocks carry many branches."""
    return make_alpha([3, 1, 7, 2, 1, 12, 1, 1, 4, 1, 1, 2])


@pytest.fixture(scope="session")
def small_alphas(golden, twos, pattern, spiky):
    return [golden, twos, pattern, spiky, make_alpha([5, 1, 3]), make_alpha([1, 4, 1, 1, 6, 2])]


@pytest.fixture(scope="session")
def witness():
    """Ten ones, then a_11 = 10^5 dominating everything before it."""
    from sturmian_targets.services.experiments import theorem_b_alpha

    return theorem_b_alpha(k=10, C=Fraction(1000))


@pytest.fixture(scope="session")
def two_huge():
    return make_alpha([1, 1, 1, 200, 1, 5000, 1])
