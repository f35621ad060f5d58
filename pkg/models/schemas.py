from fractions import Fraction
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, field_serializer, field_validator, model_validator

from errors import InvalidCertificateError, PreconditionError


def sup_norm(v) -> int:
    return max((abs(int(a)) for a in v), default=0)


class GridPayload(BaseModel):
    dim: int
    origin: List[int]
    extents: List[int]
    bits: str

    @field_validator("bits")
    @classmethod
    def binary_digits(cls, bits: str) -> str:
        if bits.strip("01"):
            raise ValueError("bits must contain only '0' and '1'")
        return bits

    @model_validator(mode="after")
    def consistent_axes(self):
        if self.dim < 1 or len(self.origin) != self.dim or len(self.extents) != self.dim:
            raise ValueError("origin and extents must both have length dim")
        if any(e < 1 for e in self.extents):
            raise ValueError("extents must be positive")
        return self


class LocalPeriodicityCert(BaseModel):
    """Certificate of local periodicity: far from the origin every K-neighbourhood has a period in V"""
    V: List[List[int]]
    K: int
    L: int = 0

    @field_validator("V")
    @classmethod
    def nonzero_periods(cls, V: List[List[int]]) -> List[List[int]]:
        if not V:
            raise ValueError("period set V must be nonempty")
        if any(sup_norm(v) == 0 for v in V):
            raise ValueError("periods must be nonzero")
        return V

    @model_validator(mode="after")
    def positive_parameters(self):
        if self.K < 1 or self.L < 0:
            raise ValueError("K must be positive and L nonnegative")
        if len({len(v) for v in self.V}) != 1:
            raise ValueError("periods must share one dimension")
        return self

    def check_radius(self) -> None:
        total = sum(sup_norm(v) for v in self.V)
        if self.K <= total:
            raise InvalidCertificateError(f"K = {self.K} must exceed the sum of period norms {total}")

    @classmethod
    def from_json(cls, text: str) -> "LocalPeriodicityCert":
        try:
            return cls.model_validate_json(text)
        except ValueError as e:
            raise InvalidCertificateError(f"malformed certificate: {e}") from e


class PeriodSearchParams(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    C: Fraction
    n: int
    m: int
    m0: int = 0

    @field_validator("C", mode="before")
    @classmethod
    def as_fraction(cls, value) -> Fraction:
        return Fraction(value)

    @field_serializer("C")
    def fraction_text(self, C: Fraction) -> str:
        return str(C)

    @model_validator(mode="after")
    def ordered_sizes(self):
        if self.C <= 0 or self.m < 1 or self.m >= self.n or self.m0 < 0:
            raise ValueError("need C > 0 and 1 <= m < n and m0 >= 0")
        return self

    def slack(self, dim: int) -> Fraction:
        return self.m ** dim - self.C * self.n ** (dim - 1)

    def check(self, dim: int) -> None:
        if self.slack(dim) < 1:
            raise PreconditionError(
                f"m^d - C n^(d-1) = {self.slack(dim)} < 1 for m={self.m}, n={self.n}, C={self.C}, d={dim}")


class LocalPeriodReport(BaseModel):
    z: List[int]
    v: Optional[List[int]] = None
    norm: Optional[int] = None
    distinct_blocks: int
    anchors: int


class VerificationReport(BaseModel):
    holds: bool
    first_violation: Optional[List[int]] = None
    checked: int
    neighborhood: str


class MuchnikReport(BaseModel):
    K: int
    V: List[List[int]]
    L: Optional[int] = None
    window: str
    neighborhood: str
    note: str = "finite sample: a missing L is evidence, not proof, of failure"


class MorseHedlundVerdict(BaseModel):
    certificate: Optional[int] = None
    n_max: int
    counts: List[int]
    period: Optional[int] = None
    preperiod: Optional[int] = None


class TailPeriods(BaseModel):
    N: int
    right_period: Optional[int] = None
    left_period: Optional[int] = None


class GrowthFitResult(BaseModel):
    exponent: float
    residual: float


class ComplexityRow(BaseModel):
    n: int
    count: int
    stabilized: bool
    window: str
    L: int


class GlobalPeriodsReport(BaseModel):
    periods: List[List[int]]
    lattice_rank: int
    ideal_crystal: bool


class NivatReport(BaseModel):
    sizes: List[int]
    count: int
    bound: int
    below_bound: bool
    periods: List[List[int]]


class RepetitivityReport(BaseModel):
    t: int
    radius: Optional[int] = None
    patches: int


class SectionWitness(BaseModel):
    path: str
    axes: List[int] = []
    values: List[int] = []
    dim: int
    exponent: Optional[float] = None
    residual: Optional[float] = None
    reason: str


class LevelReport(BaseModel):
    path: str
    dim: int
    bound: int
    counts: List[int]
    stabilized: bool
    exponent: Optional[float] = None
    residual: Optional[float] = None
    within_bound: Optional[bool] = None
    lower_bounds: bool = False
    tails: Optional[TailPeriods] = None


class DefinabilityReport(BaseModel):
    verdict: Literal["consistent-with-definable", "not-definable-evidence", "inconclusive"]
    levels: List[LevelReport]
    witness: Optional[SectionWitness] = None
    heuristic_sections: bool = False
    notes: List[str] = []
