from fractions import Fraction
from typing import Any, Dict, List, Optional

import mpmath
from pydantic import BaseModel, ConfigDict, computed_field, field_validator, model_validator

from sturmian_targets.config.settings import settings


def render(value: Fraction, digits: Optional[int] = None) -> str:
    """Decimal rendering of an exact rational, advisory only."""
    digits = digits or settings.float_digits
    with mpmath.workdps(digits + 5):
        return mpmath.nstr(mpmath.mpf(value.numerator) / value.denominator, digits)


class RationalOut(BaseModel):
    num: str
    den: str
    approx: str

    @classmethod
    def of(cls, value: Fraction) -> "RationalOut":
        value = Fraction(value)
        return cls(num=str(value.numerator), den=str(value.denominator), approx=render(value))


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise ValueError("give rationals as 'p/q' strings, not floats")
    return Fraction(str(value).strip())


class ConvergentRow(BaseModel):
    k: int
    a: Optional[int]
    p: str
    q: str
    theta: RationalOut


class CountOut(BaseModel):
    alpha: str
    x: RationalOut
    N: int
    count: int
    measure_sum: RationalOut


class RatioPoint(BaseModel):
    N: int
    n: Optional[int] = None        ## set when N = q_n - 1
    count: int
    measure_sum: RationalOut
    ratio: Optional[str]            ## None when log(count) or log(sum) is not positive
    pointwise_ok: Optional[bool] = None
    setwise_ok: Optional[bool] = None


class RatioSeries(BaseModel):
    alpha: str
    x: RationalOut
    points: List[RatioPoint]


class HStat(BaseModel):
    i: int
    integral: RationalOut
    lower: RationalOut
    pieces: Optional[int]
    ok: bool


class PairStat(BaseModel):
    i: int
    j: int
    value: RationalOut
    product: RationalOut
    factor: RationalOut
    vacuous: bool
    within_bounds: bool
    decay_ok: bool


class KestenResult(BaseModel):
    i: int
    b: int
    count: int
    expected: RationalOut
    ok: bool


class QuasiIndependence(BaseModel):
    k: int
    i: int
    b: int
    value: RationalOut
    lower: RationalOut
    upper: RationalOut
    vacuous: bool
    ok: bool


class UnionIndependence(BaseModel):
    i: int
    b_prime: int
    j: int
    b: int
    value: RationalOut
    lower: RationalOut
    upper: RationalOut
    vacuous: bool
    ok: bool


class ThmBConfig(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    m: int
    rho: Fraction = Fraction(1, 5)
    sigma: Fraction = Fraction(1, 10)
    C: Fraction = Fraction(1000)

    @field_validator("rho", "sigma", "C", mode="before")
    @classmethod
    def _rational(cls, value):
        return parse_rational(value)

    @model_validator(mode="after")
    def _ranges(self):
        if not Fraction(1, 8) < self.rho < Fraction(1, 4):
            raise ValueError(f"rho={self.rho} outside (1/8, 1/4)")
        if not Fraction(1, 16) < self.sigma < Fraction(1, 8):
            raise ValueError(f"sigma={self.sigma} outside (1/16, 1/8)")
        if self.C <= 0:
            raise ValueError(f"C={self.C} must be positive")
        if self.m < 2:
            raise ValueError(f"m={self.m} must be at least 2")
        if self.rho - self.sigma <= 1 / self.C:
            raise ValueError(f"rho - sigma = {self.rho - self.sigma} must exceed 1/C = {1 / self.C}")
        return self

    @property
    def gap_lower(self) -> Fraction:
        """D = (rho - sigma - 1/C) / (1 + 1/C)."""
        return (self.rho - self.sigma - 1 / self.C) / (1 + 1 / self.C)


class WCheck(BaseModel):
    b: int
    measure: RationalOut
    closed_form: RationalOut
    ok: bool


class PairGap(BaseModel):
    x: RationalOut
    y: RationalOut
    f_x: str
    f_y: str
    block_x: int
    block_y: int
    gap_ok: bool


class ThmBReport(BaseModel):
    alpha: str
    m: int
    a_m: int
    rho: str
    sigma: str
    C: str
    lambda_X: RationalOut
    lambda_Y: RationalOut
    gap_lower: RationalOut
    w_checks: List[WCheck]
    nested: bool
    pairs: List[PairGap]
    min_gap: Optional[str]
    ok: bool


class OscillationReport(BaseModel):
    alpha: str
    m1: int
    m2: int
    x: RationalOut
    f_m1: str
    f_m2: str
    difference: str
    threshold: RationalOut
    ok: bool


class WnEstimate(BaseModel):
    n: int
    samples: int
    hits: int
    estimate: float
    half_width_99: float
    sigma: float
    skipped: int
    an_hits: int                    ## a_i < n^2 for all i <= n
    joint_hits: int                 ## inside W_n and A_n


class LargeElementStats(BaseModel):
    C: str
    n_max: int
    samples: int
    found: int
    fraction: float
    first_m: Dict[int, int]
    g_m_hits: Dict[int, int]
    implication_ok: bool
    skipped: int


class GrowthRow(BaseModel):
    n: int
    samples: int
    exceeding: int
    fraction_exceeding: float
    mean_sum: float
    median_sum: float


class GaussKuzmin(BaseModel):
    samples: int
    ones: int
    fraction: float
    expected: float
    z_score: float
    skipped: int


class SuiteResult(BaseModel):
    name: str
    checks: int = 0
    failures: int = 0
    vacuous: int = 0
    detail: List[str] = []

    @computed_field
    @property
    def passed(self) -> bool:
        return self.failures == 0


class RunConfig(BaseModel):
    """Everything that determines a run's primary output; jobs and paths are left out on purpose."""

    subcommand: str
    alpha: Optional[str] = None
    x: Optional[str] = None
    N: Optional[int] = None
    n: Optional[int] = None
    m: Optional[int] = None
    rho: Optional[str] = None
    sigma: Optional[str] = None
    C: Optional[str] = None
    seed: Optional[int] = None
    samples: Optional[int] = None
    checkpoints: Optional[str] = None
    oracle_max: Optional[int] = None
    extra: Optional[str] = None
    fmt: str = "json"

    @field_validator("alpha", "x", "rho", "sigma", "C", "checkpoints", "extra", mode="before")
    @classmethod
    def _squeezed(cls, value):
        ## tokens are space separated, so values carry no whitespace
        return "".join(value.split()) if isinstance(value, str) else value

    def canonical(self) -> str:
        fields = self.model_dump(exclude_none=True)
        return " ".join(f"{key}={fields[key]}" for key in sorted(fields))

    @classmethod
    def from_canonical(cls, text: str) -> "RunConfig":
        pairs = dict(token.split("=", 1) for token in text.split())
        return cls(**pairs)


class ErrorResponse(BaseModel):
    error: str
    message: str
