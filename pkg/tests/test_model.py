import logging
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import binom

from utils.errors import DomainError, LevelOutOfRange, NonBinaryOutcome, RootNotBracketed
from utils.model import (
    Dataset,
    PriorSpec,
    Priors,
    SpikeSlabPrior,
    ThetaPrior,
    derive_spike_slab,
    logistic,
    selection_cap,
)


class TestLogistic:
    def test_reference_values(self):
        assert logistic(0.0) == 0.5
        assert logistic(math.log(3.0)) == pytest.approx(0.75, abs=1e-15)

    def test_saturates(self):
        assert logistic(800.0) == 1.0
        assert logistic(-800.0) == 0.0
        assert np.all(np.isfinite(logistic(np.array([-1e6, 1e6]))))

    @given(st.floats(min_value=-700, max_value=700, allow_nan=False))
    def test_symmetry(self, u):
        assert logistic(u) + logistic(-u) == pytest.approx(1.0, abs=1e-15)


class TestDataset:
    def test_binary_defaults(self):
        data = Dataset(y=[0, 1, 1], x=[1, 0, 1], z=np.ones((3, 2)))
        assert (data.n, data.d, data.levels) == (3, 2, 1)
        assert not data.is_categorical
        np.testing.assert_array_equal(data.treatment_matrix[:, 0], [1.0, 0.0, 1.0])

    def test_categorical_levels_inferred(self):
        data = Dataset(y=[0, 1, 1, 0], x=[0, 1, 2, 2], z=np.zeros((4, 0)))
        assert data.levels == 2
        assert data.is_categorical
        assert data.treatment_matrix.shape == (4, 2)

    def test_arrays_are_read_only(self):
        data = Dataset(y=[0, 1], x=[0, 1], z=[[1.0], [2.0]])
        with pytest.raises(ValueError):
            data.z[0, 0] = 5.0

    def test_zero_nuisance_columns(self):
        data = Dataset(y=[0, 1], x=[0, 1], z=np.empty((2, 0)))
        assert data.d == 0

    def test_rejects_non_binary_outcome(self):
        with pytest.raises(NonBinaryOutcome):
            Dataset(y=[0, 2], x=[0, 1], z=np.zeros((2, 1)))

    def test_rejects_row_mismatch(self):
        with pytest.raises(DomainError):
            Dataset(y=[0, 1, 1], x=[0, 1], z=np.zeros((3, 1)))

    def test_rejects_missing_category(self):
        with pytest.raises(LevelOutOfRange):
            Dataset(y=[0, 1, 1], x=[0, 2, 2], z=np.zeros((3, 1)))

    def test_rejects_fractional_treatment(self):
        with pytest.raises(LevelOutOfRange):
            Dataset(y=[0, 1], x=[0, 0.5], z=np.zeros((2, 1)))

    def test_rejects_non_finite_design(self):
        with pytest.raises(DomainError):
            Dataset(y=[0, 1], x=[0, 1], z=[[np.nan], [1.0]])

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            Dataset(y=[], x=[], z=np.empty((0, 1)))


class TestSpikeSlab:
    def test_desk_scale_values(self):
        prior = derive_spike_slab(400, 500)
        assert prior.tau0_sq == pytest.approx(0.0025)
        assert prior.tau1_sq == pytest.approx(0.01 * 500 ** 2.1 / 400)
        assert prior.tau1_sq == pytest.approx(11.63, abs=0.01)
        assert binom.sf(10, 500, prior.q) == pytest.approx(0.1, abs=1e-8)

    def test_cap_uses_natural_log(self):
        assert selection_cap(400) == 10.0
        assert selection_cap(100_000) == pytest.approx(math.log(100_000))

    def test_slab_floor_at_one(self):
        assert derive_spike_slab(400, 20).tau1_sq == 1.0

    @pytest.mark.parametrize("n", [50, 400, 2000])
    def test_monotone_in_dimension(self, n):
        priors = [derive_spike_slab(n, d) for d in (20, 50, 200, 500, 1500)]
        tau1 = [p.tau1_sq for p in priors]
        q = [p.q for p in priors]
        assert all(a <= b for a, b in zip(tau1, tau1[1:]))
        assert all(a >= b for a, b in zip(q, q[1:]))
        assert all(p.tau0_sq < p.tau1_sq for p in priors)

    def test_small_dimension_falls_back(self, caplog):
        with caplog.at_level(logging.WARNING):
            prior = derive_spike_slab(100, 5)
        assert prior.q == pytest.approx(0.1)
        assert "falling back" in caplog.text

    def test_small_dimension_strict(self):
        with pytest.raises(RootNotBracketed):
            derive_spike_slab(100, 5, strict=True)

    @pytest.mark.parametrize("tau0, tau1, q", [(0.0, 1.0, 0.1), (2.0, 1.0, 0.1), (0.1, 1.0, 1.0)])
    def test_invalid_prior(self, tau0, tau1, q):
        with pytest.raises(DomainError):
            SpikeSlabPrior(tau0, tau1, q)

    def test_theta_prior_positive(self):
        with pytest.raises(DomainError):
            ThetaPrior(0.0)


class TestPriorSpec:
    def test_resolve_derives_unset_values(self):
        priors = PriorSpec(lam=4.0).resolve(400, 500)
        assert priors == Priors(derive_spike_slab(400, 500), ThetaPrior(4.0))

    def test_overrides_win(self):
        priors = PriorSpec(tau0_sq=0.01, q=0.2).resolve(400, 500)
        assert priors.spike_slab.tau0_sq == 0.01
        assert priors.spike_slab.q == 0.2
        assert priors.spike_slab.tau1_sq == derive_spike_slab(400, 500).tau1_sq
