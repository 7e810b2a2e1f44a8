"""Frequentist logistic fitting kernels: Newton-Raphson MLE and L1-penalized fits."""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from scipy.special import expit

from utils.errors import DomainError, EmptyInput, Nonconvergence, Separation

logger = logging.getLogger(__name__)

MAX_NEWTON_ITER = 25
MAX_HALVINGS = 30
SEPARATION_BOUND = 30.0


@dataclass(frozen=True, eq=False)
class LogisticFit:
    coef: np.ndarray
    cov: np.ndarray
    loglik: float
    iterations: int


@dataclass(frozen=True, eq=False)
class LassoFit:
    coef: np.ndarray
    penalty: float
    objective_trace: Tuple[float, ...]
    cycles: int
    converged: bool

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.coef)


def log_likelihood(design: np.ndarray, y: np.ndarray, coef: np.ndarray) -> float:
    eta = design @ coef
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _information(design: np.ndarray, coef: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    mu = expit(design @ coef)
    weight = mu * (1.0 - mu)
    return design.T @ (design * weight[:, None]), mu


def logistic_mle(
    design: np.ndarray,
    y: np.ndarray,
    max_iter: int = MAX_NEWTON_ITER,
    tol: float = 1e-8,
    separation_bound: float = SEPARATION_BOUND,
) -> LogisticFit:
    """Unpenalized logistic MLE by Newton-Raphson with step halving."""
    design = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    if design.shape[0] == 0 or design.shape[1] == 0:
        raise EmptyInput("logistic fit needs at least one row and one column")
    if np.all(y == y[0]):
        raise Separation(f"outcome is constant ({int(y[0])}); the MLE does not exist")

    coef = np.zeros(design.shape[1])
    loglik = log_likelihood(design, y, coef)
    for iteration in range(1, max_iter + 1):
        info, mu = _information(design, coef)
        try:
            factor = scipy.linalg.cho_factor(info, lower=True)
        except np.linalg.LinAlgError as e:
            raise Nonconvergence(f"observed information is singular at iteration {iteration}") from e
        step = scipy.linalg.cho_solve(factor, design.T @ (y - mu))

        scale = 1.0
        for _ in range(MAX_HALVINGS):
            candidate = coef + scale * step
            cand_loglik = log_likelihood(design, y, candidate)
            if cand_loglik >= loglik - 1e-12:
                break
            scale *= 0.5
        else:
            raise Nonconvergence("step halving exhausted without increasing the likelihood")

        coef, previous = candidate, loglik
        loglik = cand_loglik
        if np.max(np.abs(coef)) > separation_bound:
            raise Separation(f"coefficients diverge (|coef| > {separation_bound:g}); data look separated")
        if np.max(np.abs(scale * step)) < tol or abs(loglik - previous) < tol * (abs(loglik) + tol):
            break
    else:
        raise Nonconvergence(f"Newton-Raphson did not converge in {max_iter} iterations")

    info, _ = _information(design, coef)
    try:
        cov = scipy.linalg.cho_solve(scipy.linalg.cho_factor(info, lower=True), np.eye(info.shape[0]))
    except np.linalg.LinAlgError as e:
        raise Nonconvergence("observed information is singular at the optimum") from e
    return LogisticFit(coef=coef, cov=cov, loglik=loglik, iterations=iteration)


def lasso_objective(
    z: np.ndarray, y: np.ndarray, coef: np.ndarray, penalty: float, penalty_factor: Optional[np.ndarray] = None
) -> float:
    """Mean logistic loss plus penalty * sum_j factor_j |coef_j|."""
    n = z.shape[0]
    factor = np.ones(z.shape[1]) if penalty_factor is None else penalty_factor
    l1 = float(np.sum(factor * np.abs(coef)))
    penalty_term = penalty * l1 if l1 > 0.0 else 0.0
    return -log_likelihood(z, y, coef) / n + penalty_term


def logistic_lasso(
    z: np.ndarray,
    y: np.ndarray,
    penalty: float,
    penalty_factor: Optional[np.ndarray] = None,
    init: Optional[np.ndarray] = None,
    max_cycles: int = 1000,
    tol: float = 1e-7,
) -> LassoFit:
    """Cyclic coordinate descent on the quadratic majorizer of the logistic loss.

    Each coordinate minimizes loss-bound + penalty exactly (soft thresholding
    with curvature sum_i z_ij^2 / (4n)), so the objective never increases.
    Sweeps alternate between the active set and full passes; convergence is
    declared on a full pass that moves no coefficient by more than ``tol``.
    """
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = z.shape
    if penalty < 0:
        raise DomainError(f"penalty must be non-negative, got {penalty}")
    factor = np.ones(p) if penalty_factor is None else np.asarray(penalty_factor, dtype=float)
    curvature = 0.25 * np.sum(z * z, axis=0) / n
    coef = np.zeros(p) if init is None else np.array(init, dtype=float)
    eta = z @ coef

    trace = [lasso_objective(z, y, coef, penalty, factor)]
    full_pass = True
    converged = False
    cycle = 0
    for cycle in range(1, max_cycles + 1):
        indices = range(p) if full_pass else np.flatnonzero(coef)
        max_delta = 0.0
        for j in indices:
            if curvature[j] == 0.0:
                continue
            grad = z[:, j] @ (expit(eta) - y) / n
            target = coef[j] - grad / curvature[j]
            threshold = 0.0 if factor[j] == 0.0 else penalty * factor[j] / curvature[j]
            updated = math.copysign(max(abs(target) - threshold, 0.0), target)
            delta = updated - coef[j]
            if delta != 0.0:
                eta += delta * z[:, j]
                coef[j] = updated
                max_delta = max(max_delta, abs(delta))
        trace.append(lasso_objective(z, y, coef, penalty, factor))
        if max_delta < tol:
            if full_pass:
                converged = True
                break
            full_pass = True
        else:
            full_pass = False

    if not converged:
        logger.warning(f"logistic lasso hit {max_cycles} cycles at penalty {penalty:.4g} without converging")
    return LassoFit(coef=coef, penalty=float(penalty), objective_trace=tuple(trace), cycles=cycle, converged=converged)


def lasso_penalty_grid(
    z: np.ndarray, y: np.ndarray, size: int = 50, ratio: float = 0.01, penalty_factor: Optional[np.ndarray] = None
) -> np.ndarray:
    """Log-spaced penalties from the smallest one that zeroes every penalized coefficient."""
    if size < 1:
        raise DomainError("penalty grid needs at least one value")
    n, p = z.shape
    factor = np.ones(p) if penalty_factor is None else np.asarray(penalty_factor, dtype=float)
    penalized = factor > 0
    score = np.abs(z.T @ (np.asarray(y, dtype=float) - 0.5)) / n
    top = float(np.max(score[penalized] / factor[penalized])) if penalized.any() else 1.0
    top = max(top, 1e-8)
    return top * np.logspace(0.0, math.log10(ratio), size)


def bic(z: np.ndarray, y: np.ndarray, coef: np.ndarray) -> float:
    df = int(np.count_nonzero(coef))
    return -2.0 * log_likelihood(z, y, coef) + df * math.log(z.shape[0])


def select_by_bic(
    z: np.ndarray, y: np.ndarray, grid: Sequence[float], penalty_factor: Optional[np.ndarray] = None
) -> Tuple[LassoFit, np.ndarray]:
    """Warm-started lasso path over ``grid`` (largest penalty first); returns the BIC minimizer."""
    grid = np.sort(np.asarray(grid, dtype=float))[::-1]
    if grid.size == 0:
        raise EmptyInput("lasso penalty grid is empty")
    best, best_score = None, math.inf
    scores = np.empty(grid.size)
    init = None
    for k, penalty in enumerate(grid):
        fit = logistic_lasso(z, y, penalty, penalty_factor=penalty_factor, init=init)
        init = fit.coef
        scores[k] = bic(z, y, fit.coef)
        if scores[k] < best_score:
            best, best_score = fit, scores[k]
    logger.debug(f"BIC picked penalty {best.penalty:.4g} with {best.support.size} active coefficients")
    return best, scores
