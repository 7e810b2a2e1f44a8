from dataclasses import dataclass
import logging
from typing import Optional, Tuple

import numpy as np

from inference.summary import PosteriorDraws
from samplers.conjugate import block_canonical, draw_block
from utils.errors import DomainError
from utils.model import Dataset, ThetaPrior
from utils.projection import PhiVec, ProjectionVec
from utils.randkit import RngStream, pg_draw

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ThetaState:
    theta: np.ndarray
    omega3: np.ndarray

    @classmethod
    def initial(cls, data: Dataset) -> "ThetaState":
        return cls(theta=np.zeros(data.levels), omega3=np.full(data.n, 0.25))


class ThetaSampler:
    """Conditional posterior of theta given a projection h and offset phi.

    With X~ = T - h the model is logit P(Y=1) = X~ theta + phi, so after
    augmentation theta is Gaussian with precision X~^T Omega3 X~ + I/lam and
    linear term X~^T (kappa - Omega3 phi).
    """

    def __init__(self, data: Dataset, theta_prior: ThetaPrior):
        self.data = data
        self.theta_prior = theta_prior
        self.kappa = data.y - 0.5
        self.prior_var = np.full(data.levels, theta_prior.lam)

    def residual_design(self, h: ProjectionVec) -> np.ndarray:
        columns = h.as_columns()
        if columns.shape != (self.data.n, self.data.levels):
            raise DomainError(f"projection has shape {columns.shape}, expected ({self.data.n}, {self.data.levels})")
        return self.data.treatment_matrix - columns

    def moments(self, x_tilde: np.ndarray, phi: np.ndarray, omega: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        linear, precision = block_canonical(x_tilde, self.kappa, omega, self.prior_var, offset=phi)
        cov = np.linalg.inv(precision)
        return cov @ linear, cov

    def step_residual(self, state: ThetaState, x_tilde: np.ndarray, phi: np.ndarray, rng: RngStream) -> ThetaState:
        omega = pg_draw(rng, x_tilde @ state.theta + phi)
        theta = draw_block(rng, x_tilde, self.kappa, omega, self.prior_var, offset=phi)
        return ThetaState(theta=theta, omega3=omega)

    def step(self, state: ThetaState, h: ProjectionVec, phi: PhiVec, rng: RngStream) -> ThetaState:
        if phi.phi.shape[0] != self.data.n:
            raise DomainError(f"phi has length {phi.phi.shape[0]}, expected {self.data.n}")
        return self.step_residual(state, self.residual_design(h), phi.phi, rng)


def step_theta(
    state: ThetaState,
    data: Dataset,
    h: ProjectionVec,
    phi: PhiVec,
    tp: ThetaPrior,
    rng: RngStream,
) -> ThetaState:
    return ThetaSampler(data, tp).step(state, h, phi, rng)


def theta_posterior_moments(
    data: Dataset, h: ProjectionVec, phi: PhiVec, tp: ThetaPrior, omega: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Mean and covariance of theta given fixed PG latents ``omega``."""
    sampler = ThetaSampler(data, tp)
    return sampler.moments(sampler.residual_design(h), phi.phi, np.asarray(omega, dtype=float))


def run_theta_chain(
    data: Dataset,
    h: ProjectionVec,
    phi: PhiVec,
    theta_prior: ThetaPrior,
    iterations: int,
    burn_in: int,
    seed: int,
    thin: int = 1,
    stream_id: int = 0,
    meta: Optional[dict] = None,
) -> PosteriorDraws:
    """theta-only PG Gibbs chain with h and phi held fixed."""
    if not 0 <= burn_in < iterations or thin < 1:
        raise DomainError(f"invalid chain lengths: iterations={iterations}, burn_in={burn_in}, thin={thin}")
    sampler = ThetaSampler(data, theta_prior)
    x_tilde = sampler.residual_design(h)
    rng = RngStream(seed, stream_id)
    state = ThetaState.initial(data)

    kept = []
    for sweep_index in range(iterations):
        state = sampler.step_residual(state, x_tilde, phi.phi, rng)
        if sweep_index >= burn_in and (sweep_index - burn_in) % thin == 0:
            kept.append(state.theta)

    draws = np.asarray(kept)
    if data.levels == 1:
        draws = draws[:, 0]
    provenance = {"seed": seed, "stream_id": stream_id, "sampler": "theta"}
    provenance.update(meta or {})
    logger.info(f"theta chain kept {draws.shape[0]} of {iterations} sweeps")
    return PosteriorDraws(draws=draws, meta=provenance)
