import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from quasibayes.datagen import (GroundTruth, ModelVariant, ObservationMode, ObservationSet, gen_coefficient,
                                gen_designs, gen_response, sample_observations)


def test_designs_deterministic():
    a = gen_designs(2, 2, 2, 2, 7)
    b = gen_designs(2, 2, 2, 2, 7)
    np.testing.assert_array_equal(a.X, b.X)
    np.testing.assert_array_equal(a.Z, b.Z)


def test_designs_standard_normal():
    X = gen_designs(1000, 100, 2, 2, 3).X
    assert abs(X.mean()) < 4 / math.sqrt(1e5)
    assert abs(X.var() - 1.0) < 0.05


@pytest.mark.parametrize("seed", range(5))
def test_model_one_rank_two(seed):
    truth = gen_coefficient(10, 20, ModelVariant.EXACT_LOW_RANK, seed)
    s = np.linalg.svd(truth.M_star, compute_uv=False)
    assert s[2] < 1e-10 * s[0]
    assert s[1] > 1e-6 * s[0]


@pytest.mark.parametrize("seed", range(5))
def test_model_two_approximately_low_rank(seed):
    s = np.linalg.svd(gen_coefficient(10, 20, 2, seed).M_star, compute_uv=False)
    assert 1e-6 < s[2] / s[0] < 0.5


def test_model_two_perturbation_variance():
    # the dense perturbation is what remains after removing the scaled rank-2 part
    truth = gen_coefficient(300, 200, 2, 11)
    rng = np.random.default_rng(11)
    B1, B2 = rng.standard_normal((300, 2)), rng.standard_normal((200, 2))
    U = truth.M_star - 2 * B1 @ B2.T
    assert U.var() == pytest.approx(0.1, rel=0.02)


def test_coefficient_deterministic():
    np.testing.assert_array_equal(gen_coefficient(5, 4, 1, 9).M_star, gen_coefficient(5, 4, 1, 9).M_star)


def test_response_noiseless():
    d = gen_designs(6, 3, 4, 5, 1)
    truth = gen_coefficient(3, 4, 1, 2)
    Y = gen_response(d, truth, 0.0, 3)
    np.testing.assert_allclose(Y, d.X @ truth.M_star @ d.Z, atol=1e-12)


def test_response_scalar():
    from quasibayes.datagen import DesignPair
    Y = gen_response(DesignPair([[1.0]], [[3.0]]), GroundTruth(np.array([[2.0]]), 1, ModelVariant.EXACT_LOW_RANK),
                     0.0, 0)
    np.testing.assert_array_equal(Y, [[6.0]])


def test_response_noise_variance():
    d = gen_designs(1000, 3, 4, 100, 5)
    truth = gen_coefficient(3, 4, 1, 6)
    Y = gen_response(d, truth, 0.7, 8)
    assert np.var(Y - d.X @ truth.M_star @ d.Z) == pytest.approx(0.49, rel=0.05)


def test_response_shape_mismatch():
    d = gen_designs(4, 3, 4, 5, 1)
    with pytest.raises(ValueError):
        gen_response(d, np.ones((2, 4)), 1.0, 0)


class TestObservations:
    Y = np.arange(100.0).reshape(10, 10)

    def test_no_missing(self):
        obs = sample_observations(self.Y, ObservationMode.MASKED, 0.0, 1)
        assert len(obs) == 100 and obs.is_complete()

    def test_thirty_percent_missing(self):
        obs = sample_observations(self.Y, ObservationMode.MASKED, 0.3, 1)
        assert len(obs) == 70
        assert len(set(zip(obs.rows, obs.cols))) == 70
        np.testing.assert_array_equal(obs.values, self.Y[obs.rows, obs.cols])

    @pytest.mark.parametrize("kappa", [1.0, 1.5, -0.1])
    def test_bad_missing_rate(self, kappa):
        with pytest.raises(ValueError):
            sample_observations(self.Y, ObservationMode.MASKED, kappa, 1)

    def test_full(self):
        obs = sample_observations(self.Y, ObservationMode.FULL)
        assert obs.is_complete() and obs.mode is ObservationMode.FULL
        np.testing.assert_array_equal(obs.sums(), self.Y)

    def test_iid_uniform(self):
        obs = sample_observations(self.Y, ObservationMode.IID, 100_000, 4)
        freq = obs.counts().ravel()
        assert freq.sum() == 100_000
        assert stats.chisquare(freq).pvalue > 0.01

    def test_iid_needs_draws(self):
        with pytest.raises(ValueError):
            sample_observations(self.Y, ObservationMode.IID, 0, 1)

    def test_deterministic(self):
        a = sample_observations(self.Y, "masked", 0.25, 3)
        b = sample_observations(self.Y, "masked", 0.25, 3)
        np.testing.assert_array_equal(a.rows, b.rows)
        np.testing.assert_array_equal(a.cols, b.cols)

    def test_out_of_range_indices(self):
        with pytest.raises(ValueError):
            ObservationSet([0, 3], [0, 0], [1.0, 2.0], ObservationMode.MASKED, (3, 3))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 12), st.integers(1, 12), st.floats(0, 0.99), st.integers(0, 10**6))
    def test_masked_count_and_distinct(self, n, q, kappa, seed):
        Y = np.ones((n, q))
        obs = sample_observations(Y, ObservationMode.MASKED, kappa, seed)
        expected = math.ceil(round((1 - kappa) * n * q, 9))
        assert len(obs) == expected
        assert np.all(obs.counts() <= 1)
