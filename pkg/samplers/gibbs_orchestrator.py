import hashlib
import json
import logging
from dataclasses import asdict, dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from inference.summary import PosteriorDraws
from samplers.nuisance.nuisance_sampler import NuisanceSampler, NuisanceState
from samplers.propensity.propensity_sampler import PropensitySampler, PropensityState
from samplers.theta.theta_sampler import ThetaSampler, ThetaState, run_theta_chain
from utils.errors import DomainError
from utils.glm import lasso_penalty_grid, select_by_bic
from utils.model import Dataset, Priors
from utils.projection import (
    ProjectionVec,
    categorical_outcome_probs,
    cond_outcome_probs,
    propensity_probs,
    reparam_phi,
    stack_projections,
    vw_projection_binary,
    vw_projection_categorical,
)
from utils.randkit import RngStream

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 1000


@dataclass(frozen=True)
class ChainConfig:
    iterations: int = 6000
    burn_in: int = 1000
    seed: int = 0
    thin: int = 1
    stream_id: int = 0
    propensity_first: bool = True

    def __post_init__(self):
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError(f"need 0 <= burn_in < iterations, got burn_in={self.burn_in}, iterations={self.iterations}")
        if self.thin < 1:
            raise DomainError(f"thin must be at least 1, got {self.thin}")

    @property
    def retained(self) -> int:
        return len(range(self.burn_in, self.iterations, self.thin))

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class ChainState:
    nuisance: NuisanceState
    propensity: Tuple[PropensityState, ...]
    theta: ThetaState

    @classmethod
    def initial(cls, data: Dataset) -> "ChainState":
        return cls(
            nuisance=NuisanceState.initial(data),
            propensity=tuple(PropensityState.initial(data) for _ in range(data.levels)),
            theta=ThetaState.initial(data),
        )


def variance_weighted_h(
    data: Dataset, theta_tilde: np.ndarray, beta: np.ndarray, gammas: Sequence[np.ndarray]
) -> ProjectionVec:
    """h from one set of nuisance values: a vector for a binary treatment, one column per dummy otherwise."""
    if not data.is_categorical:
        probs = cond_outcome_probs(theta_tilde, beta, data)
        return vw_projection_binary(probs, propensity_probs(gammas[0], data))
    parts = []
    for j, gamma in enumerate(gammas):
        probs_j = categorical_outcome_probs(theta_tilde, beta, data, j)
        parts.append(vw_projection_categorical(j, probs_j, propensity_probs(gamma, data)))
    return stack_projections(parts)


class GibbsOrchestrator:
    """Runs full sweeps over the propensity, nuisance and theta blocks.

    One sweep: gamma (one block per dummy), then (theta_tilde, beta), then h
    and phi from those draws, then theta. ``propensity_first=False`` swaps the
    first two blocks; they do not condition on each other.
    """

    def __init__(self, data: Dataset, priors: Priors, propensity_first: bool = True):
        self.data = data
        self.priors = priors
        self.propensity_first = propensity_first
        self.nuisance_sampler = NuisanceSampler(data, priors.spike_slab, priors.theta)
        self.propensity_samplers = [PropensitySampler(data, priors.spike_slab, j) for j in range(data.levels)]
        self.theta_sampler = ThetaSampler(data, priors.theta)

    def projection(self, nuisance: NuisanceState, propensity: Sequence[PropensityState]) -> ProjectionVec:
        return variance_weighted_h(self.data, nuisance.theta_tilde, nuisance.beta, [block.gamma for block in propensity])

    def _step_propensity(self, blocks: Sequence[PropensityState], rng: RngStream) -> Tuple[PropensityState, ...]:
        return tuple(sampler.step(block, rng) for sampler, block in zip(self.propensity_samplers, blocks))

    def sweep(self, state: ChainState, rng: RngStream) -> Tuple[ChainState, np.ndarray]:
        if self.propensity_first:
            propensity = self._step_propensity(state.propensity, rng)
            nuisance = self.nuisance_sampler.step(state.nuisance, rng)
        else:
            nuisance = self.nuisance_sampler.step(state.nuisance, rng)
            propensity = self._step_propensity(state.propensity, rng)

        h = self.projection(nuisance, propensity)
        phi = reparam_phi(nuisance.theta_tilde, h, nuisance.beta, self.data)
        theta = self.theta_sampler.step(state.theta, h, phi, rng)
        return ChainState(nuisance=nuisance, propensity=propensity, theta=theta), theta.theta

    def run_chain(self, config: ChainConfig, meta: Optional[dict] = None) -> PosteriorDraws:
        logger.info(
            f"Starting chain: n={self.data.n}, d={self.data.d}, K={self.data.levels}, "
            f"{config.iterations} sweeps, seed={config.seed}, stream={config.stream_id}"
        )
        rng = RngStream(config.seed, config.stream_id)
        state = ChainState.initial(self.data)
        kept = np.empty((config.retained, self.data.levels))
        slot = 0
        for sweep_index in range(config.iterations):
            state, theta = self.sweep(state, rng)
            if sweep_index >= config.burn_in and (sweep_index - config.burn_in) % config.thin == 0:
                kept[slot] = theta
                slot += 1
            if (sweep_index + 1) % PROGRESS_EVERY == 0:
                logger.debug(f"sweep {sweep_index + 1}/{config.iterations}: theta={np.array2string(theta, precision=4)}")

        draws = kept[:, 0] if not self.data.is_categorical else kept
        provenance = {
            "seed": config.seed,
            "stream_id": config.stream_id,
            "config_digest": config.digest(),
            "sampler": "gibbs",
        }
        provenance.update(meta or {})
        logger.info(f"Chain finished with {slot} retained draws")
        return PosteriorDraws(draws=draws, meta=provenance)


def sweep(state: ChainState, data: Dataset, priors: Priors, rng: RngStream) -> Tuple[ChainState, np.ndarray]:
    return GibbsOrchestrator(data, priors).sweep(state, rng)


def run_chain(data: Dataset, priors: Priors, config: ChainConfig, meta: Optional[dict] = None) -> PosteriorDraws:
    return GibbsOrchestrator(data, priors, config.propensity_first).run_chain(config, meta)


def _bic_lasso(design: np.ndarray, response: np.ndarray, lasso_grid, penalty_factor=None) -> np.ndarray:
    grid = lasso_grid if lasso_grid is not None else lasso_penalty_grid(design, response, penalty_factor=penalty_factor)
    fit, _ = select_by_bic(design, response, grid, penalty_factor=penalty_factor)
    return fit.coef


def plugin_nuisance(
    data: Dataset, lasso_grid: Optional[Sequence[float]] = None
) -> Tuple[ProjectionVec, np.ndarray, np.ndarray]:
    """Lasso point estimates of the nuisance blocks, turned into (h, theta_tilde, beta).

    The outcome fit leaves the treatment columns unpenalized; each propensity
    block is its own lasso of one dummy on Z.
    """
    treatment = data.treatment_matrix
    design = np.hstack([treatment, data.z])
    factor = np.concatenate([np.zeros(data.levels), np.ones(data.d)])
    coef = _bic_lasso(design, data.y, lasso_grid, factor)
    theta_tilde, beta = coef[: data.levels], coef[data.levels:]
    logger.info(f"plug-in outcome lasso kept {int(np.count_nonzero(beta))} of {data.d} nuisance columns")

    gammas = [_bic_lasso(data.z, treatment[:, j], lasso_grid) for j in range(data.levels)]
    return variance_weighted_h(data, theta_tilde, beta, gammas), theta_tilde, beta


def run_plugin_chain(
    data: Dataset,
    priors: Priors,
    config: ChainConfig,
    lasso_grid: Optional[Sequence[float]] = None,
    meta: Optional[dict] = None,
) -> PosteriorDraws:
    """Lasso nuisance estimates, then the theta-only chain with h and phi fixed at them."""
    h, theta_tilde, beta = plugin_nuisance(data, lasso_grid)
    phi = reparam_phi(theta_tilde, h, beta, data)
    return run_theta_chain(
        data,
        h,
        phi,
        priors.theta,
        config.iterations,
        config.burn_in,
        config.seed,
        thin=config.thin,
        stream_id=config.stream_id,
        meta={"config_digest": config.digest(), "sampler": "plugin", **(meta or {})},
    )
