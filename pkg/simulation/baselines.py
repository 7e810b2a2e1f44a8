"""Frequentist comparators: ORACLE (true support refit) and NAIVE (post-lasso refit)."""

import logging
import math
from typing import Optional, Sequence

import numpy as np
from scipy.stats import norm

from inference.summary import IntervalEstimate
from utils.errors import DomainError, EmptyInput, EmptySelection
from utils.glm import lasso_penalty_grid, logistic_mle, select_by_bic
from utils.model import Dataset

logger = logging.getLogger(__name__)


def _require_binary(data: Dataset, method: str) -> None:
    if data.is_categorical:
        raise DomainError(f"{method} handles a binary treatment only, got K={data.levels}")


def oracle_fit(data: Dataset, support: Sequence[int], alpha: float = 0.05) -> IntervalEstimate:
    """Logistic MLE of Y on [X, Z_support] with a Wald interval for the X coefficient."""
    _require_binary(data, "oracle_fit")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    columns = np.asarray(support, dtype=int)
    design = np.column_stack([data.x.astype(float), data.z[:, columns]])
    fit = logistic_mle(design, data.y)

    point = float(fit.coef[0])
    se = math.sqrt(fit.cov[0, 0])
    half = norm.ppf(1.0 - alpha / 2.0) * se
    return IntervalEstimate(point=point, se=se, lower=point - half, upper=point + half, level=1.0 - alpha)


def lasso_selection(data: Dataset, lasso_grid: Optional[Sequence[float]] = None, grid_size: int = 50) -> np.ndarray:
    """Columns of Z kept by a BIC-tuned logistic lasso of Y on Z alone."""
    if lasso_grid is None:
        lasso_grid = lasso_penalty_grid(data.z, data.y, size=grid_size)
    if len(lasso_grid) == 0:
        raise EmptyInput("lasso penalty grid is empty")
    fit, _ = select_by_bic(data.z, data.y, lasso_grid)
    if fit.support.size == 0:
        raise EmptySelection(f"lasso at penalty {fit.penalty:.4g} selected no columns")
    return fit.support


def naive_fit(
    data: Dataset,
    lasso_grid: Optional[Sequence[float]] = None,
    alpha: float = 0.05,
    grid_size: int = 50,
) -> IntervalEstimate:
    _require_binary(data, "naive_fit")
    try:
        selected = lasso_selection(data, lasso_grid, grid_size)
    except EmptySelection as e:
        logger.warning(f"{str(e)}; regressing Y on X alone")
        selected = np.empty(0, dtype=int)
    logger.debug(f"naive refit on X plus {selected.size} selected columns")
    return oracle_fit(data, selected, alpha)
