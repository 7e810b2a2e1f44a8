import math

import numpy as np
import pytest

from utils.errors import DomainError, FactorizationFailure
from utils.randkit import RngStream, bernoulli_draw, mvn_draw, mvn_draw_canonical, pg_draw


def pg_mean(c: float) -> float:
    return 0.25 if c == 0 else math.tanh(c / 2.0) / (2.0 * c)


def pg_var(c: float) -> float:
    if c == 0:
        return 1.0 / 24.0
    return (math.sinh(c) - c) / (4.0 * c ** 3 * math.cosh(c / 2.0) ** 2)


def test_same_key_replays_identical_draws():
    a = RngStream(3, 9).generator.standard_normal(16)
    b = RngStream(3, 9).generator.standard_normal(16)
    np.testing.assert_array_equal(a, b)


def test_stream_ids_give_different_sequences():
    a = RngStream(3, 0).generator.random(8)
    b = RngStream(3, 1).generator.random(8)
    assert not np.array_equal(a, b)


def test_child_streams_are_reproducible_and_distinct():
    parent = RngStream(42, 5)
    first, again, other = parent.child(1), RngStream(42, 5).child(1), parent.child(2)
    assert first.stream_id == again.stream_id
    assert first.stream_id != other.stream_id
    assert first.stream_id != parent.stream_id
    np.testing.assert_array_equal(first.generator.random(4), again.generator.random(4))


def test_counter_advances_with_draws():
    stream = RngStream(1)
    start = stream.counter
    stream.generator.random(100)
    assert stream.counter > start


@pytest.mark.parametrize("seed, stream_id", [(-1, 0), (0, -1), (1 << 64, 0)])
def test_rejects_keys_outside_64_bits(seed, stream_id):
    with pytest.raises(DomainError):
        RngStream(seed, stream_id)


def test_pg_scalar_and_array_shapes(rng):
    assert isinstance(pg_draw(rng, 1.5), float)
    out = pg_draw(rng, np.zeros((3, 4)))
    assert out.shape == (3, 4)
    assert pg_draw(rng, np.empty(0)).shape == (0,)


def test_pg_is_symmetric_in_tilt():
    c = np.linspace(-4.0, 4.0, 50)
    np.testing.assert_array_equal(pg_draw(RngStream(8), c), pg_draw(RngStream(8), -c))


def test_pg_rejects_non_finite_tilt(rng):
    with pytest.raises(DomainError):
        pg_draw(rng, np.array([0.0, np.nan]))
    with pytest.raises(DomainError):
        pg_draw(rng, np.inf)


@pytest.mark.parametrize("c", [0.0, 0.5, 1.0, 2.0, 5.0])
def test_pg_mean_and_variance(c):
    draws = pg_draw(RngStream(11, int(c * 10)), np.full(200_000, c))
    assert np.all(draws > 0.0)
    se = draws.std() / math.sqrt(draws.size)
    assert abs(draws.mean() - pg_mean(c)) < 4.0 * se
    assert draws.var() == pytest.approx(pg_var(c), rel=0.05)


def test_pg_mixed_tilts_match_their_own_means():
    tilts = np.repeat([0.0, 3.0, 12.0], 100_000)
    draws = pg_draw(RngStream(4), tilts).reshape(3, -1)
    for row, c in zip(draws, (0.0, 3.0, 12.0)):
        assert abs(row.mean() - pg_mean(c)) < 4.0 * row.std() / math.sqrt(row.size)


def test_pg_draws_come_from_the_stream():
    stream = RngStream(5, 2)
    start = stream.counter
    first = pg_draw(stream, np.full(64, 1.3))
    assert stream.counter > start
    np.testing.assert_array_equal(first, pg_draw(RngStream(5, 2), np.full(64, 1.3)))
    assert not np.array_equal(first, pg_draw(RngStream(5, 3), np.full(64, 1.3)))


@pytest.mark.parametrize("c", [1e-6, 0.1, 10.0, 30.0, 80.0])
def test_pg_mean_at_extreme_tilts(c):
    draws = pg_draw(RngStream(17, int(c * 10)), np.full(100_000, c))
    assert np.all(np.isfinite(draws)) and np.all(draws > 0.0)
    assert abs(draws.mean() - pg_mean(c)) < 4.0 * draws.std() / math.sqrt(draws.size)


@pytest.mark.slow
@pytest.mark.parametrize("c", [0.0, 0.5, 1.0, 2.0, 5.0])
def test_pg_mean_million_draws(c):
    draws = pg_draw(RngStream(2024, 100 + int(c * 10)), np.full(1_000_000, c))
    assert abs(draws.mean() - pg_mean(c)) < 4.0 * draws.std() / 1000.0


def test_mvn_identity_variance(rng):
    draws = mvn_draw(rng, np.zeros(2), np.eye(2), size=100_000)
    assert draws.shape == (100_000, 2)
    np.testing.assert_allclose(draws.var(axis=0), 1.0, atol=0.02)


def test_mvn_scalar_case(rng):
    draws = mvn_draw(rng, np.array([3.0]), np.array([[4.0]]), size=100_000)
    assert draws.mean() == pytest.approx(3.0, abs=0.01)
    assert draws.std() == pytest.approx(0.5, abs=0.01)


def test_mvn_covariance_is_inverse_precision(rng):
    precision = np.array([[2.0, 1.0], [1.0, 2.0]])
    draws = mvn_draw(rng, np.zeros(2), precision, size=100_000)
    expected = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0
    assert np.linalg.norm(np.cov(draws.T) - expected) < 0.05


def test_mvn_single_draw_is_a_vector(rng):
    assert mvn_draw(rng, np.ones(3), np.eye(3)).shape == (3,)


def test_mvn_rejects_indefinite_precision(rng):
    with pytest.raises(FactorizationFailure):
        mvn_draw(rng, np.zeros(2), np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_mvn_rejects_shape_mismatch(rng):
    with pytest.raises(DomainError):
        mvn_draw(rng, np.zeros(3), np.eye(2))


def test_canonical_draw_mean(rng):
    precision = np.array([[3.0, 0.5], [0.5, 1.0]])
    linear = np.array([1.0, -2.0])
    draws = np.array([mvn_draw_canonical(rng, linear, precision) for _ in range(20_000)])
    np.testing.assert_allclose(draws.mean(axis=0), np.linalg.solve(precision, linear), atol=0.03)
    assert mvn_draw_canonical(rng, np.empty(0), np.empty((0, 0))).shape == (0,)


def test_bernoulli_edges(rng):
    assert np.all(bernoulli_draw(rng, np.zeros(1000)) == 0)
    assert np.all(bernoulli_draw(rng, np.ones(1000)) == 1)
    assert bernoulli_draw(rng, 0.5) in (0, 1)


def test_bernoulli_mean(rng):
    draws = bernoulli_draw(rng, 0.3, size=1_000_000)
    assert draws.mean() == pytest.approx(0.3, abs=0.0014)


@pytest.mark.parametrize("p", [-0.1, 1.5, np.nan])
def test_bernoulli_rejects_bad_probability(rng, p):
    with pytest.raises(DomainError):
        bernoulli_draw(rng, np.array([0.2, p]))
