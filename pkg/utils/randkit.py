"""Reproducible random streams and the samplers consumed by the Gibbs steps.

Every stream is a Philox counter-based generator keyed by ``(seed, stream_id)``,
so replications can run on any worker in any order and still produce the same
draws. Pólya-Gamma PG(1, c) variates come from ``polyagamma``'s Devroye sampler
driven by the stream's own generator.
"""

import logging
from typing import Optional, Union

import numpy as np
import scipy.linalg
from polyagamma import random_polyagamma

from utils.errors import DomainError, FactorizationFailure

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1

ArrayLike = Union[float, np.ndarray]


def _mix64(value: int) -> int:
    """splitmix64 finalizer."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def split_stream_id(stream_id: int, tag: int) -> int:
    return _mix64((stream_id & _MASK64) ^ _mix64(tag & _MASK64))


class RngStream:
    """Single-owner random stream identified by ``(seed, stream_id)``."""

    def __init__(self, seed: int, stream_id: int = 0):
        if not (0 <= seed <= _MASK64 and 0 <= stream_id <= _MASK64):
            raise DomainError(f"seed and stream_id must be 64-bit unsigned, got ({seed}, {stream_id})")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        key = self.seed | (self.stream_id << 64)
        self._generator = np.random.Generator(np.random.Philox(key=key))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    @property
    def counter(self) -> int:
        words = self._generator.bit_generator.state["state"]["counter"]
        return sum(int(w) << (64 * i) for i, w in enumerate(words))

    def child(self, tag: int) -> "RngStream":
        return RngStream(self.seed, split_stream_id(self.stream_id, tag))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def pg_draw(rng: RngStream, c: ArrayLike) -> ArrayLike:
    """Exact draws from PG(1, c), one per entry of ``c``.

    PG(1, c) = PG(1, -c), so only ``|c|`` is passed on and ``c`` and ``-c``
    give identical sequences from the same stream.
    """
    tilt = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(tilt)):
        raise DomainError("Polya-Gamma tilt must be finite")
    if tilt.size == 0:
        return np.empty(tilt.shape)
    out = random_polyagamma(1, np.abs(tilt), method="devroye", random_state=rng.generator)
    if tilt.ndim == 0:
        return float(out)
    return np.asarray(out, dtype=float).reshape(tilt.shape)


def _cholesky(precision: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.cholesky(precision, lower=True, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise FactorizationFailure(f"precision matrix is not positive definite: {str(e)}") from e


def mvn_draw(
    rng: RngStream, mean: np.ndarray, precision: np.ndarray, size: Optional[int] = None
) -> np.ndarray:
    """Draw from N(mean, precision^{-1}) through the Cholesky factor of the precision."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    precision = np.atleast_2d(np.asarray(precision, dtype=float))
    p = mean.shape[0]
    if precision.shape != (p, p):
        raise DomainError(f"precision shape {precision.shape} does not match mean length {p}")
    lower = _cholesky(precision)
    if size is None:
        noise = rng.generator.standard_normal(p)
        return mean + scipy.linalg.solve_triangular(lower.T, noise, lower=False)
    noise = rng.generator.standard_normal((p, size))
    return mean + scipy.linalg.solve_triangular(lower.T, noise, lower=False).T


def mvn_draw_canonical(rng: RngStream, linear: np.ndarray, precision: np.ndarray) -> np.ndarray:
    """Draw from N(P^{-1} b, P^{-1}) given the canonical pair (b, P)."""
    linear = np.asarray(linear, dtype=float)
    if linear.shape[0] == 0:
        return np.empty(0)
    lower = _cholesky(precision)
    mean = scipy.linalg.cho_solve((lower, True), linear)
    noise = rng.generator.standard_normal(linear.shape[0])
    return mean + scipy.linalg.solve_triangular(lower.T, noise, lower=False)


def bernoulli_draw(rng: RngStream, p: ArrayLike, size: Optional[int] = None) -> ArrayLike:
    prob = np.asarray(p, dtype=float)
    if np.any(~((prob >= 0.0) & (prob <= 1.0))):
        raise DomainError("Bernoulli probability must lie in [0, 1]")
    shape = prob.shape if size is None else size
    draws = (rng.generator.random(shape) < prob).astype(np.int8)
    if size is None and prob.ndim == 0:
        return int(draws)
    return draws
