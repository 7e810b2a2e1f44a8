"""Synthetic data for the simulation study.

Rows of Z are N(0, H) with H_ij = rho^|i-j|, the treatment follows a logistic
working model in Z, and the outcome is logistic in (X, Z).
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.errors import DomainError
from utils.model import Dataset, logistic
from utils.randkit import RngStream, bernoulli_draw

logger = logging.getLogger(__name__)

DEFAULT_BETA0 = (-0.4, 0.8, -1.0, 1.5)
DEFAULT_GAMMA0 = (0.3, -0.5, -1.0, 1.5)


@dataclass(frozen=True)
class DgpConfig:
    """``beta0`` and ``gamma0`` list the leading coefficients; the rest are zero."""

    n: int
    d: int
    theta0: float
    beta0: Tuple[float, ...] = DEFAULT_BETA0
    gamma0: Tuple[float, ...] = DEFAULT_GAMMA0
    rho: float = 0.5
    seed: int = 2024

    def __post_init__(self):
        object.__setattr__(self, "beta0", tuple(float(b) for b in self.beta0))
        object.__setattr__(self, "gamma0", tuple(float(g) for g in self.gamma0))
        if self.n < 10:
            raise DomainError(f"simulated datasets need n >= 10, got {self.n}")
        for name, coef in (("beta0", self.beta0), ("gamma0", self.gamma0)):
            nonzero = [j for j, c in enumerate(coef) if c != 0.0]
            if nonzero and nonzero[-1] >= self.d:
                raise DomainError(f"{name} has a nonzero entry at index {nonzero[-1]} but d={self.d}")
        if not abs(self.rho) < 1.0:
            raise DomainError(f"AR correlation must satisfy |rho| < 1, got {self.rho}")

    def _padded(self, coef: Tuple[float, ...]) -> np.ndarray:
        out = np.zeros(self.d)
        head = np.asarray(coef[: self.d], dtype=float)
        out[: head.shape[0]] = head
        return out

    def beta_vector(self) -> np.ndarray:
        return self._padded(self.beta0)

    def gamma_vector(self) -> np.ndarray:
        return self._padded(self.gamma0)

    @property
    def support(self) -> np.ndarray:
        """Indices of the nonzero outcome coefficients."""
        return np.flatnonzero(self.beta_vector())


def gen_design(cfg: DgpConfig, rng: RngStream) -> np.ndarray:
    """AR(1) recursion across columns; exact for H_ij = rho^|i-j|."""
    noise = rng.generator.standard_normal((cfg.n, cfg.d))
    if cfg.d == 0:
        return noise
    z = np.empty_like(noise)
    z[:, 0] = noise[:, 0]
    innovation = math.sqrt(1.0 - cfg.rho ** 2)
    for j in range(1, cfg.d):
        z[:, j] = cfg.rho * z[:, j - 1] + innovation * noise[:, j]
    return z


def gen_binary(linear_predictor: np.ndarray, rng: RngStream) -> np.ndarray:
    eta = np.asarray(linear_predictor, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise DomainError("linear predictor contains non-finite entries")
    return bernoulli_draw(rng, logistic(eta))


def generate_dataset(cfg: DgpConfig, rng: RngStream) -> Dataset:
    z = gen_design(cfg, rng)
    x = gen_binary(z @ cfg.gamma_vector(), rng)
    y = gen_binary(cfg.theta0 * x + z @ cfg.beta_vector(), rng)
    return Dataset(y=y, x=x, z=z, levels=1)
