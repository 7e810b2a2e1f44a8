from dataclasses import dataclass
import logging

import numpy as np

from samplers.conjugate import draw_block, spike_slab_variances, update_indicators
from utils.errors import DomainError
from utils.model import Dataset, SpikeSlabPrior
from utils.randkit import RngStream, pg_draw

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PropensityState:
    gamma: np.ndarray
    i2: np.ndarray
    omega2: np.ndarray

    @classmethod
    def initial(cls, data: Dataset) -> "PropensityState":
        return cls(
            gamma=np.zeros(data.d),
            i2=np.zeros(data.d, dtype=np.int8),
            omega2=np.full(data.n, 0.25),
        )


class PropensitySampler:
    """Draws gamma for the working model P(X^j = 1 | Z) = logistic(Z^T gamma).

    ``level`` selects the dummy column used as the response; for a binary
    treatment there is only level 0, the treatment itself.
    """

    def __init__(self, data: Dataset, spike_slab: SpikeSlabPrior, level: int = 0):
        if not 0 <= level < data.levels:
            raise DomainError(f"propensity level {level} outside 0..{data.levels - 1}")
        self.data = data
        self.spike_slab = spike_slab
        self.level = level
        self.kappa = data.treatment_matrix[:, level] - 0.5

    def step(self, state: PropensityState, rng: RngStream) -> PropensityState:
        if state.gamma.shape[0] != self.data.d:
            raise DomainError("propensity state does not match the dataset dimensions")
        z = self.data.z
        omega = pg_draw(rng, z @ state.gamma)
        prior_var = spike_slab_variances(state.i2, self.spike_slab)
        gamma = draw_block(rng, z, self.kappa, omega, prior_var)
        i2 = update_indicators(rng, gamma, self.spike_slab)
        return PropensityState(gamma=gamma, i2=i2, omega2=omega)


def step_propensity(
    state: PropensityState, data: Dataset, ss: SpikeSlabPrior, rng: RngStream, level: int = 0
) -> PropensityState:
    return PropensitySampler(data, ss, level).step(state, rng)
