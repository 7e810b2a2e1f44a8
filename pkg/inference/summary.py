"""Posterior draws to interval estimates, and interval sets to coverage statistics."""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from utils.errors import DegenerateDraws, DomainError, EmptyInput, InsufficientDraws

logger = logging.getLogger(__name__)

# numpy's "linear" rule: position (m - 1) * prob between order statistics.
QUANTILE_METHOD = "linear"


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """Retained theta draws, shape (m,) for a binary treatment or (m, K) for K dummies."""

    draws: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim not in (1, 2):
            raise DomainError(f"draws must be 1-D or 2-D, got {draws.ndim} dimensions")
        if draws.shape[0] == 0:
            raise InsufficientDraws("no draws retained")
        if not np.all(np.isfinite(draws)):
            raise DomainError("draws contain non-finite values")
        draws.setflags(write=False)
        object.__setattr__(self, "draws", draws)

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    @property
    def levels(self) -> int:
        return 1 if self.draws.ndim == 1 else self.draws.shape[1]

    def level(self, j: int) -> "PosteriorDraws":
        if self.draws.ndim == 1:
            if j != 0:
                raise DomainError(f"binary draws have only level 0, asked for {j}")
            return self
        return PosteriorDraws(self.draws[:, j], {**self.meta, "level": j})

    def __eq__(self, other) -> bool:
        if not isinstance(other, PosteriorDraws):
            return NotImplemented
        return self.meta == other.meta and np.array_equal(self.draws, other.draws)


@dataclass(frozen=True)
class IntervalEstimate:
    point: float
    se: float
    lower: float
    upper: float
    level: float
    term: str = "theta"

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"credible level must lie in (0, 1), got {self.level}")
        if not self.lower < self.upper:
            raise DomainError(f"interval bounds out of order: [{self.lower}, {self.upper}]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_dict(self) -> dict:
        return {
            "term": self.term,
            "point": self.point,
            "se": self.se,
            "lower": self.lower,
            "upper": self.upper,
            "level": self.level,
        }


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def summarize(draws: PosteriorDraws, alpha: float = 0.05, term: str = "theta") -> IntervalEstimate:
    """Posterior mean, sd and equal-tailed (alpha/2, 1 - alpha/2) percentile interval."""
    _check_alpha(alpha)
    values = draws.draws
    if values.ndim != 1:
        raise DomainError("summarize takes one column of draws; use summarize_levels for categorical draws")
    if values.shape[0] < 2:
        raise InsufficientDraws(f"need at least 2 draws, got {values.shape[0]}")
    if np.all(values == values[0]):
        raise DegenerateDraws(f"all {values.shape[0]} draws equal {values[0]!r}; the chain did not move")

    lower, upper = np.quantile(values, [alpha / 2.0, 1.0 - alpha / 2.0], method=QUANTILE_METHOD)
    if lower == upper:
        raise DegenerateDraws(f"the {alpha / 2.0} and {1.0 - alpha / 2.0} quantiles coincide at {lower!r}")
    return IntervalEstimate(
        point=float(np.mean(values)),
        se=float(np.std(values, ddof=1)),
        lower=float(lower),
        upper=float(upper),
        level=1.0 - alpha,
        term=term,
    )


def summarize_levels(draws: PosteriorDraws, alpha: float = 0.05) -> List[IntervalEstimate]:
    """One interval per treatment level; level j is the contrast of X = j + 1 against X = 0."""
    if draws.levels == 1:
        return [summarize(draws.level(0), alpha)]
    return [summarize(draws.level(j), alpha, term=f"theta[{j + 1}]") for j in range(draws.levels)]


@dataclass(frozen=True)
class CoverageSummary:
    coverage: float
    length: float
    bias: float
    signed_bias: float
    count: int

    @property
    def mc_se(self) -> float:
        return math.sqrt(self.coverage * (1.0 - self.coverage) / self.count)


def coverage_stats(
    intervals: Sequence[IntervalEstimate], points: Sequence[float], theta0: float
) -> CoverageSummary:
    """Coverage of theta0, mean interval length and |mean point - theta0| over replications.

    Sums are exactly rounded (math.fsum) so the result does not depend on the
    order of the replications.
    """
    if len(intervals) == 0:
        raise EmptyInput("coverage needs at least one interval")
    if len(intervals) != len(points):
        raise DomainError(f"{len(intervals)} intervals but {len(points)} point estimates")
    count = len(intervals)
    hits = sum(1 for interval in intervals if interval.contains(theta0))
    signed = math.fsum(points) / count - theta0
    return CoverageSummary(
        coverage=hits / count,
        length=math.fsum(interval.length for interval in intervals) / count,
        bias=abs(signed),
        signed_bias=signed,
        count=count,
    )
