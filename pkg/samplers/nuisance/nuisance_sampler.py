from dataclasses import dataclass
import logging

import numpy as np

from samplers.conjugate import draw_block, spike_slab_variances, update_indicators
from utils.errors import DomainError
from utils.model import Dataset, SpikeSlabPrior, ThetaPrior
from utils.randkit import RngStream, pg_draw

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NuisanceState:
    """Outcome-model draw: theta_tilde (one entry per dummy), beta, indicators I1, latents omega1."""

    theta_tilde: np.ndarray
    beta: np.ndarray
    i1: np.ndarray
    omega1: np.ndarray

    @classmethod
    def initial(cls, data: Dataset) -> "NuisanceState":
        return cls(
            theta_tilde=np.zeros(data.levels),
            beta=np.zeros(data.d),
            i1=np.zeros(data.d, dtype=np.int8),
            omega1=np.full(data.n, 0.25),
        )


class NuisanceSampler:
    """Draws (theta_tilde, beta) from the outcome model's conditional posterior.

    The design D = [X, Z] and kappa = Y - 1/2 are fixed for a dataset, so they
    are built once here.
    """

    def __init__(self, data: Dataset, spike_slab: SpikeSlabPrior, theta_prior: ThetaPrior):
        self.data = data
        self.spike_slab = spike_slab
        self.theta_prior = theta_prior
        self.levels = data.levels
        self.design = np.hstack([data.treatment_matrix, data.z])
        self.kappa = data.y - 0.5

    def step(self, state: NuisanceState, rng: RngStream) -> NuisanceState:
        if state.beta.shape[0] != self.data.d or state.theta_tilde.shape[0] != self.levels:
            raise DomainError("nuisance state does not match the dataset dimensions")
        coef = np.concatenate([state.theta_tilde, state.beta])
        omega = pg_draw(rng, self.design @ coef)

        prior_var = np.concatenate(
            [np.full(self.levels, self.theta_prior.lam), spike_slab_variances(state.i1, self.spike_slab)]
        )
        coef = draw_block(rng, self.design, self.kappa, omega, prior_var)
        theta_tilde, beta = coef[: self.levels], coef[self.levels:]
        i1 = update_indicators(rng, beta, self.spike_slab)
        return NuisanceState(theta_tilde=theta_tilde, beta=beta, i1=i1, omega1=omega)


def step_nuisance(
    state: NuisanceState,
    data: Dataset,
    ss: SpikeSlabPrior,
    tp: ThetaPrior,
    rng: RngStream,
) -> NuisanceState:
    return NuisanceSampler(data, ss, tp).step(state, rng)
