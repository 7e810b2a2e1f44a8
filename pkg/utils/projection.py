"""Variance-weighted projection h(Z) and the reparameterized nuisance phi.

h(Z_i) is E[X_i | Z_i] weighted by Var(Y_i | X_i, Z_i) in each treatment
class. Subtracting it from X makes the logistic score for theta insensitive,
to first order, to errors in the nuisance coefficients.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.special import expit, logsumexp

from utils.errors import DegenerateProbability, DomainError, LevelOutOfRange
from utils.model import Dataset, logistic

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-12


def _clamp(p: np.ndarray) -> np.ndarray:
    return np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)


def _require_open_unit(name: str, p: np.ndarray) -> None:
    if np.any(~((p > 0.0) & (p < 1.0))):
        raise DegenerateProbability(f"{name} must lie strictly inside (0, 1)")


@dataclass(frozen=True, eq=False)
class OutcomeProbs:
    """P(Y=1 | X=1, Z) and P(Y=1 | X=0, Z) under one nuisance draw."""

    p1: np.ndarray
    p0: np.ndarray

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        if p1.shape != p0.shape:
            raise DomainError(f"p1 and p0 shapes differ: {p1.shape} vs {p0.shape}")
        _require_open_unit("outcome probabilities", p1)
        _require_open_unit("outcome probabilities", p0)
        object.__setattr__(self, "p1", p1)
        object.__setattr__(self, "p0", p0)


@dataclass(frozen=True, eq=False)
class ProjectionVec:
    """h values, shape (n,) for one treatment column or (n, K) for K dummies."""

    h: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        _require_open_unit("projection", h)
        object.__setattr__(self, "h", h)

    def as_columns(self) -> np.ndarray:
        return self.h.reshape(self.h.shape[0], -1)

    @classmethod
    def stack(cls, parts: Sequence["ProjectionVec"]) -> "ProjectionVec":
        return cls(np.column_stack([p.h for p in parts]))


@dataclass(frozen=True, eq=False)
class PhiVec:
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if not np.all(np.isfinite(phi)):
            raise DomainError("phi contains non-finite entries")
        object.__setattr__(self, "phi", phi)


def cond_outcome_probs(theta_tilde, beta: np.ndarray, data: Dataset) -> OutcomeProbs:
    theta_tilde = float(np.asarray(theta_tilde).reshape(-1)[0])
    base = data.z @ np.asarray(beta, dtype=float)
    return OutcomeProbs(p1=_clamp(logistic(theta_tilde + base)), p0=_clamp(logistic(base)))


def categorical_outcome_probs(theta_tilde: np.ndarray, beta: np.ndarray, data: Dataset, j: int) -> OutcomeProbs:
    """Probabilities for dummy j switched on/off, other dummies held at their observed values."""
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    dummies = data.treatment_matrix
    base = dummies @ theta_tilde - dummies[:, j] * theta_tilde[j] + data.z @ np.asarray(beta, dtype=float)
    return OutcomeProbs(p1=_clamp(logistic(theta_tilde[j] + base)), p0=_clamp(logistic(base)))


def propensity_probs(gamma: np.ndarray, data: Dataset) -> np.ndarray:
    return _clamp(logistic(data.z @ np.asarray(gamma, dtype=float)))


def _share(log_w0: np.ndarray, log_w1: np.ndarray) -> np.ndarray:
    # w1 / (w0 + w1) = logistic(-log R), R = w0 / w1
    return expit(-(log_w0 - log_w1))


def vw_projection_binary(probs: OutcomeProbs, propensity: np.ndarray) -> ProjectionVec:
    propensity = np.asarray(propensity, dtype=float)
    _require_open_unit("propensity", propensity)
    p1, p0, pi = _clamp(probs.p1), _clamp(probs.p0), _clamp(propensity)
    log_w1 = np.log(p1 * (1.0 - p1)) + np.log(pi)
    log_w0 = np.log(p0 * (1.0 - p0)) + np.log(1.0 - pi)
    return ProjectionVec(_clamp(_share(log_w0, log_w1)))


def vw_projection_categorical(j: int, probs_j: OutcomeProbs, propensity_j: np.ndarray) -> ProjectionVec:
    """h^j for dummy j; the ratio is the binary one with X^j in place of X."""
    if j < 0:
        raise LevelOutOfRange(f"dummy index must be non-negative, got {j}")
    return vw_projection_binary(probs_j, propensity_j)


def vw_projection_general(levels, var_by_level, p_by_level) -> np.ndarray:
    """Variance-weighted conditional mean of a finite discrete X given Z.

    ``var_by_level[k]`` and ``p_by_level[k]`` hold Var(Y | X=levels[k], Z) and
    P(X=levels[k] | Z) for every row.
    """
    levels = np.asarray(levels, dtype=float)
    var = np.atleast_2d(np.asarray(var_by_level, dtype=float))
    prob = np.atleast_2d(np.asarray(p_by_level, dtype=float))
    if var.shape != prob.shape or var.shape[0] != levels.shape[0]:
        raise DomainError("need one variance row and one probability row per level")
    if np.any(~((var > 0.0) & (var <= 0.25))):
        raise DomainError("conditional variances must lie in (0, 0.25]")
    if np.any(prob < 0.0) or np.any(np.abs(prob.sum(axis=0) - 1.0) > 1e-8):
        raise DomainError("level probabilities must be non-negative and sum to one per row")

    with np.errstate(divide="ignore"):
        log_w = np.stack([np.log(var[k]) + np.log(prob[k]) for k in range(levels.shape[0])])
    if np.any(np.all(np.isneginf(log_w), axis=0)):
        raise DegenerateProbability("a row has zero total variance weight")

    if levels.shape[0] == 2:
        return levels[0] + (levels[1] - levels[0]) * _share(log_w[0], log_w[1])
    weights = np.exp(log_w - logsumexp(log_w, axis=0))
    return levels @ weights


def stack_projections(parts: Sequence[ProjectionVec]) -> ProjectionVec:
    return ProjectionVec.stack(parts)


def reparam_phi(theta_tilde, h: ProjectionVec, beta: np.ndarray, data: Dataset) -> PhiVec:
    """phi_i = h_i^T theta_tilde + Z_i^T beta."""
    theta_tilde = np.atleast_1d(np.asarray(theta_tilde, dtype=float))
    return PhiVec(h.as_columns() @ theta_tilde + data.z @ np.asarray(beta, dtype=float))


def dummy_encode(x, levels: int) -> np.ndarray:
    """Column j is 1 where x == j + 1; level 0 is the all-zero reference row."""
    x = np.asarray(x).ravel()
    if np.any(x < 0) or np.any(x > levels):
        raise LevelOutOfRange(f"treatment levels must lie in 0..{levels}")
    return (x[:, None] == np.arange(1, levels + 1)[None, :]).astype(np.int8)


def orthogonality_gradient(x: np.ndarray, h: np.ndarray, mu: np.ndarray, z: np.ndarray) -> np.ndarray:
    """(1/n) sum_i (x_i - h_i) mu_i (1 - mu_i) Z_i, the score's sensitivity to beta (up to sign)."""
    weight = (np.asarray(x, dtype=float) - np.asarray(h, dtype=float)) * mu * (1.0 - mu)
    return weight @ np.asarray(z, dtype=float) / weight.shape[0]


@dataclass(frozen=True)
class RegressionGap:
    rms_residual: float
    share_outside_unit: float


def weighted_regression_gap(h: np.ndarray, z: np.ndarray) -> RegressionGap:
    """How far the best linear fit Z^T g is from the bounded target h."""
    h = np.asarray(h, dtype=float)
    coef, *_ = scipy.linalg.lstsq(np.asarray(z, dtype=float), h)
    fitted = z @ coef
    return RegressionGap(
        rms_residual=float(np.sqrt(np.mean((h - fitted) ** 2))),
        share_outside_unit=float(np.mean((fitted <= 0.0) | (fitted >= 1.0))),
    )
