"""Pieces shared by every Polya-Gamma augmented logistic block."""

from typing import Optional, Tuple

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from utils.model import SpikeSlabPrior
from utils.randkit import RngStream, bernoulli_draw, mvn_draw_canonical


def block_canonical(
    design: np.ndarray,
    kappa: np.ndarray,
    omega: np.ndarray,
    prior_var: np.ndarray,
    offset: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """(b, P) of the Gaussian conditional: P = D^T Omega D + diag(1/prior_var), b = D^T (kappa - Omega offset)."""
    precision = design.T @ (design * omega[:, None])
    precision[np.diag_indices_from(precision)] += 1.0 / prior_var
    residual = kappa if offset is None else kappa - omega * offset
    return design.T @ residual, precision


def draw_block(
    rng: RngStream,
    design: np.ndarray,
    kappa: np.ndarray,
    omega: np.ndarray,
    prior_var: np.ndarray,
    offset: Optional[np.ndarray] = None,
) -> np.ndarray:
    if design.shape[1] == 0:
        return np.empty(0)
    linear, precision = block_canonical(design, kappa, omega, prior_var, offset)
    return mvn_draw_canonical(rng, linear, precision)


def spike_slab_variances(indicators: np.ndarray, prior: SpikeSlabPrior) -> np.ndarray:
    return np.where(indicators == 1, prior.tau1_sq, prior.tau0_sq)


def inclusion_probabilities(coef: np.ndarray, prior: SpikeSlabPrior) -> np.ndarray:
    """P(I_j = 1 | coef_j), from the log-density difference of slab and spike."""
    log_slab = np.log(prior.q) + norm.logpdf(coef, scale=np.sqrt(prior.tau1_sq))
    log_spike = np.log1p(-prior.q) + norm.logpdf(coef, scale=np.sqrt(prior.tau0_sq))
    return expit(log_slab - log_spike)


def update_indicators(rng: RngStream, coef: np.ndarray, prior: SpikeSlabPrior) -> np.ndarray:
    if coef.shape[0] == 0:
        return np.empty(0, dtype=np.int8)
    return bernoulli_draw(rng, inclusion_probabilities(coef, prior))
