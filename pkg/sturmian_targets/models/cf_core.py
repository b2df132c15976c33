"""Exact continued-fraction arithmetic and the rational-proxy rotation number.

An irrational alpha is represented by the rational ``[0; a_1, ..., a_n, M]``
with a large tail element M.  Every quantity used below the horizon
``q_n - 1`` depends only on the prefix a_1..a_n, so the proxy is exact there;
beyond it every operation raises :class:`HorizonError`.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Dict, List, Optional, Sequence, Tuple, Union

from loguru import logger

from sturmian_targets.config.settings import settings
from sturmian_targets.models.errors import ConfigError, DomainError, HorizonError, SturmianError
from sturmian_targets.models.intervals import frac_part


@dataclass(frozen=True)
class ContinuedFraction:
    elements: Tuple[int, ...]

    def __post_init__(self):
        if not self.elements:
            raise DomainError("continued fraction needs at least one element")
        if any(a < 1 for a in self.elements):
            raise DomainError(f"continued fraction elements must be >= 1: {self.elements}")

    def __len__(self) -> int:
        return len(self.elements)

    def __str__(self) -> str:
        return "[0;" + ",".join(str(a) for a in self.elements) + "]"


@dataclass(frozen=True)
class Convergent:
    k: int
    p: int
    q: int


def cf_of_rational(p: int, q: int) -> ContinuedFraction:
    """Euclid on p/q in (0,1); the expansion is canonical (last element >= 2 unless it is [0;1])."""
    if not (0 < p < q):
        raise DomainError(f"{p}/{q} is not in (0,1)")
    if gcd(p, q) != 1:
        raise DomainError(f"{p}/{q} is not reduced")
    elements = []
    num, den = q, p
    while den:
        a, rem = divmod(num, den)
        elements.append(a)
        num, den = den, rem
    return ContinuedFraction(tuple(elements))


def value_of_cf(cf: ContinuedFraction) -> Fraction:
    value = Fraction(0)
    for a in reversed(cf.elements):
        value = 1 / (a + value)
    return value


def convergents(cf: ContinuedFraction) -> List[Convergent]:
    """(p_k, q_k) for k = 0..n; q_0 = 1, q_1 = a_1, q_{k+1} = a_{k+1} q_k + q_{k-1}."""
    p_prev, q_prev = 1, 0       # k = -1
    p_cur, q_cur = 0, 1         # k = 0
    table = [Convergent(0, p_cur, q_cur)]
    for k, a in enumerate(cf.elements, start=1):
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        table.append(Convergent(k, p_cur, q_cur))
    return table


@dataclass(frozen=True)
class Alpha:
    value: Fraction
    cf: ContinuedFraction
    tail_element: Optional[int] = None
    label: str = ""

    @cached_property
    def _table(self) -> Dict[int, Convergent]:
        table = {c.k: c for c in convergents(self.cf)}
        table[-1] = Convergent(-1, 1, 0)
        return table

    @property
    def horizon_k(self) -> int:
        return len(self.cf)

    @property
    def horizon_j(self) -> int:
        return self._table[self.horizon_k].q - 1

    def a(self, i: int) -> int:
        """Element a_i, 1 <= i <= n."""
        if not (1 <= i <= self.horizon_k):
            raise HorizonError(f"element a_{i} outside prefix of length {self.horizon_k}")
        return self.cf.elements[i - 1]

    def convergent(self, k: int) -> Convergent:
        if not (-1 <= k <= self.horizon_k):
            raise HorizonError(f"convergent index {k} beyond horizon_k={self.horizon_k}")
        return self._table[k]

    def q(self, k: int) -> int:
        return self.convergent(k).q

    def p(self, k: int) -> int:
        return self.convergent(k).p

    def index_of_time(self, j: int) -> int:
        """Largest k with q_k <= j (so k = 1 when q_0 = q_1 = 1 <= j < q_2)."""
        if j < 1:
            raise DomainError(f"time {j} has no convergent below it")
        k = 0
        while k + 1 <= self.horizon_k and self._table[k + 1].q <= j:
            k += 1
        return k

    def check_time(self, t: int, slack: int = 0):
        if abs(t) > self.horizon_j + slack:
            raise HorizonError(f"orbit time {t} beyond horizon_j={self.horizon_j} (+{slack})")

    @property
    def spec(self) -> str:
        if self.label:
            return self.label
        if self.tail_element is None:
            return f"rat:{self.value.numerator}/{self.value.denominator}"
        return "cf:" + ",".join(str(a) for a in self.cf.elements)

    def to_json(self) -> dict:
        return {
            "spec": self.spec,
            "elements": list(self.cf.elements),
            "tail": self.tail_element,
            "horizon_j": str(self.horizon_j),
            "value_num": str(self.value.numerator),
            "value_den": str(self.value.denominator),
        }


PRESETS: Dict[str, Tuple[int, ...]] = {
    "golden-40": (1,) * 40,
    "twos-30": (2,) * 30,
    "pattern-123-30": (1, 2, 3) * 10,
    "silver-30": (2,) * 30,
}


def make_alpha(spec: Union[Sequence[int], Fraction, str], tail: Optional[int] = None) -> Alpha:
    """Build an Alpha from a CF prefix, an exact rational in (0,1), or a preset name."""
    if isinstance(spec, str):
        if spec not in PRESETS:
            raise ConfigError(f"unknown preset {spec!r}; known: {sorted(PRESETS)}")
        alpha = make_alpha(PRESETS[spec], tail)
        return Alpha(alpha.value, alpha.cf, alpha.tail_element, f"preset:{spec}")
    if isinstance(spec, Fraction):
        cf = cf_of_rational(spec.numerator, spec.denominator)
        return Alpha(spec, cf, None)
    prefix = tuple(int(a) for a in spec)
    if not prefix:
        raise DomainError("empty continued-fraction prefix")
    tail = settings.default_tail if tail is None else tail
    if tail < 2:
        raise DomainError(f"tail element must be >= 2, got {tail}")
    cf = ContinuedFraction(prefix)
    value = value_of_cf(ContinuedFraction(prefix + (tail,)))
    return Alpha(value, cf, tail)


def parse_alpha(text: str, tail: Optional[int] = None) -> Alpha:
    """Parse "cf:1,1,2" | "rat:3/7" | "preset:golden-40"."""
    kind, _, body = text.strip().partition(":")
    try:
        if kind == "cf":
            return make_alpha([int(tok) for tok in body.split(",") if tok.strip()], tail)
        if kind == "rat":
            num, _, den = body.partition("/")
            value = Fraction(int(num), int(den))
            if Fraction(int(num), int(den)).denominator != int(den):
                raise DomainError(f"{body} is not reduced")
            return make_alpha(value, tail)
        if kind == "preset":
            return make_alpha(body, tail)
    except (ValueError, ZeroDivisionError) as e:
        if isinstance(e, SturmianError):
            raise
        raise ConfigError(f"cannot parse alpha spec {text!r}: {e}") from e
    raise ConfigError(f"alpha spec {text!r} must start with cf:, rat: or preset:")


def signed_error(alpha: Alpha, k: int) -> Fraction:
    """e_k = q_k*alpha - p_k; alternates in sign, e_{-1} = -1."""
    c = alpha.convergent(k)
    return c.q * alpha.value - c.p


def theta(alpha: Alpha, k: int) -> Fraction:
    """theta_k = |q_k*alpha - p_k|, with theta_{-1} = 1."""
    return abs(signed_error(alpha, k))


def nearest_distance(alpha: Alpha, t: int) -> Fraction:
    """<<t*alpha>>, the distance from t*alpha to the nearest integer."""
    if t < 0:
        raise DomainError(f"negative time {t}")
    alpha.check_time(t, slack=1)
    y = frac_part(t * alpha.value)
    return min(y, 1 - y)


def cylinder_measure(elements: Sequence[int]) -> Fraction:
    """Lebesgue measure of {alpha : a_1..a_n = elements} = 1/(q_n (q_n + q_{n-1}))."""
    q_prev, q_cur = 0, 1
    for a in elements:
        if a < 1:
            raise DomainError(f"cylinder element {a} < 1")
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    return Fraction(1, q_cur * (q_cur + q_prev))


def tail_cylinder_measure(elements: Sequence[int], b: int) -> Fraction:
    """Measure of {alpha : a_1..a_{n-1} = elements, a_n >= b}."""
    q_prev, q_cur = 0, 1
    for a in elements:
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    return Fraction(1, q_cur * (b * q_cur + q_prev))


def cylinder_ratio_check(elements: Sequence[int]) -> bool:
    """Cylinder ratio bounds for the last element b = elements[-1].

    1/(3b^2) <= lambda(C[b_1..b_n]) / lambda(C[b_1..b_{n-1}]) < 2/b^2 and
    1/(3b) < lambda(C[b_1..b_{n-1}, >= b]) / lambda(C[b_1..b_{n-1}]) < 4/b.
    The lower point bound is attained at [1, 1], hence non-strict.
    """
    if not elements:
        raise DomainError("cylinder check needs at least one element")
    *head, b = elements
    parent = cylinder_measure(head)
    ratio = cylinder_measure(elements) / parent
    tail_ratio = tail_cylinder_measure(head, b) / parent
    ok = Fraction(1, 3 * b * b) <= ratio < Fraction(2, b * b) and Fraction(1, 3 * b) < tail_ratio < Fraction(4, b)
    if not ok:
        logger.warning(f"cylinder bounds fail for {list(elements)}: ratio={ratio}, tail={tail_ratio}")
    return ok
