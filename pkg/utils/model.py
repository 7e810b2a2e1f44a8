import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import bisect
from scipy.special import expit
from scipy.stats import binom

from utils.errors import DomainError, LevelOutOfRange, NonBinaryOutcome, RootNotBracketed

logger = logging.getLogger(__name__)

SELECTION_TAIL_PROB = 0.1
Q_TOLERANCE = 1e-10


def logistic(u):
    """exp(u) / (1 + exp(u)), saturating instead of overflowing."""
    return expit(u)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Outcome ``y``, treatment ``x`` (binary or levels 0..K) and nuisance design ``z``."""

    y: np.ndarray
    x: np.ndarray
    z: np.ndarray
    levels: Optional[int] = None
    feature_names: Tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        x_raw = np.asarray(self.x).ravel()
        z = np.asarray(self.z, dtype=float)
        if z.ndim == 1:
            z = z.reshape(-1, 1) if z.size else np.empty((y.shape[0], 0))
        n = y.shape[0]
        if n < 1:
            raise DomainError("dataset needs at least one row")
        if x_raw.shape[0] != n or z.shape[0] != n:
            raise DomainError(f"row mismatch: y has {n}, x has {x_raw.shape[0]}, z has {z.shape[0]}")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise NonBinaryOutcome("outcome entries must be 0 or 1")
        if not np.all(np.isfinite(z)):
            raise DomainError("nuisance design contains non-finite entries")
        if not np.all(np.equal(np.mod(x_raw, 1), 0)) or np.any(x_raw < 0):
            raise LevelOutOfRange("treatment entries must be non-negative integers")
        x = x_raw.astype(np.int64)

        levels = self.levels if self.levels is not None else max(1, int(x.max()))
        if levels < 1:
            raise DomainError(f"level count must be at least 1, got {levels}")
        if x.max() > levels:
            raise LevelOutOfRange(f"treatment level {int(x.max())} exceeds K={levels}")
        if levels > 1:
            missing = sorted(set(range(levels + 1)) - set(np.unique(x).tolist()))
            if missing:
                raise LevelOutOfRange(f"categorical treatment levels {missing} never occur")

        for arr in (y, x, z):
            arr.setflags(write=False)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "levels", levels)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def d(self) -> int:
        return self.z.shape[1]

    @property
    def is_categorical(self) -> bool:
        return self.levels > 1

    @cached_property
    def treatment_matrix(self) -> np.ndarray:
        """n x K dummy matrix; the treatment column itself when K = 1."""
        from utils.projection import dummy_encode

        matrix = dummy_encode(self.x, self.levels).astype(float)
        matrix.setflags(write=False)
        return matrix


@dataclass(frozen=True)
class SpikeSlabPrior:
    tau0_sq: float
    tau1_sq: float
    q: float

    def __post_init__(self):
        if not 0.0 < self.tau0_sq < self.tau1_sq:
            raise DomainError(f"need 0 < tau0_sq < tau1_sq, got {self.tau0_sq}, {self.tau1_sq}")
        if not 0.0 < self.q < 1.0:
            raise DomainError(f"inclusion probability must lie in (0, 1), got {self.q}")


@dataclass(frozen=True)
class ThetaPrior:
    lam: float = 10.0

    def __post_init__(self):
        if not self.lam > 0.0:
            raise DomainError(f"theta prior variance must be positive, got {self.lam}")


@dataclass(frozen=True)
class Priors:
    spike_slab: SpikeSlabPrior
    theta: ThetaPrior = field(default_factory=ThetaPrior)

    @classmethod
    def default(cls, n: int, d: int, lam: float = 10.0) -> "Priors":
        return cls(spike_slab=derive_spike_slab(n, max(d, 1)), theta=ThetaPrior(lam))


@dataclass(frozen=True)
class PriorSpec:
    """Prior settings before the sizes are known; unset spike-and-slab values are derived per (n, d)."""

    lam: float = 10.0
    tau0_sq: Optional[float] = None
    tau1_sq: Optional[float] = None
    q: Optional[float] = None

    def resolve(self, n: int, d: int) -> Priors:
        derived = derive_spike_slab(n, max(d, 1))
        spike_slab = SpikeSlabPrior(
            tau0_sq=derived.tau0_sq if self.tau0_sq is None else self.tau0_sq,
            tau1_sq=derived.tau1_sq if self.tau1_sq is None else self.tau1_sq,
            q=derived.q if self.q is None else self.q,
        )
        return Priors(spike_slab=spike_slab, theta=ThetaPrior(self.lam))


def selection_cap(n: int) -> float:
    """K = max{10, log n}, natural log."""
    return max(10.0, math.log(n))


def _excess_selection_prob(q: float, d: int, cap: float) -> float:
    # P[Bin(d, q) > cap] for integer counts, evaluated from the log survival function
    return float(np.exp(binom.logsf(math.floor(cap), d, q)))


def derive_spike_slab(n: int, d: int, strict: bool = False) -> SpikeSlabPrior:
    if n < 2 or d < 1:
        raise DomainError(f"spike-and-slab derivation needs n >= 2 and d >= 1, got n={n}, d={d}")
    tau0_sq = 1.0 / n
    tau1_sq = max(float(n), 0.01 * d ** 2.1) / n
    cap = selection_cap(n)

    if d <= cap:
        message = f"no inclusion probability attains P[sum I > {cap:g}] = {SELECTION_TAIL_PROB} with d={d}"
        if strict:
            raise RootNotBracketed(message)
        logger.warning(f"{message}; falling back to q = 0.5/d")
        return SpikeSlabPrior(tau0_sq, tau1_sq, 0.5 / d)

    q = bisect(
        lambda p: _excess_selection_prob(p, d, cap) - SELECTION_TAIL_PROB,
        1e-15,
        1.0 - 1e-15,
        xtol=Q_TOLERANCE,
        maxiter=500,
    )
    logger.debug(f"spike-and-slab prior for n={n}, d={d}: tau0^2={tau0_sq:.4g}, tau1^2={tau1_sq:.4g}, q={q:.6g}")
    return SpikeSlabPrior(tau0_sq, tau1_sq, q)
