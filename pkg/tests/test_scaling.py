import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aircont import oracles
from aircont.errors import DegenerateChannelError, DimensionError, ValidationError
from aircont.montecarlo import make_stream, sample_channel, sample_gain
from aircont.scaling import (AirScaling, ChannelRealization, SotaScaling, air_objective,
                             clipped_inversion, effective_gain_air, effective_gain_sota, mse_air,
                             mse_sota, optimize_air_alpha_batch, optimize_air_scaling,
                             optimize_sota_scaling, sota_mse_batch, unconstrained_air_limit)


def unit_channel(**kw):
    base = dict(h=[1.0], h_a=1.0, sigma2=1.0, sigma_s2=1.0, sigma_a2=1.0, p_bar=1.0)
    base.update(kw)
    return ChannelRealization(**base)


def random_instance(rng, N=None, sigma=None, p_bar=None):
    N = N or int(rng.integers(1, 9))
    sigma = rng.uniform(0.05, 1.0) if sigma is None else sigma
    p_bar = rng.uniform(0.1, 5.0) if p_bar is None else p_bar
    ch = ChannelRealization(sample_channel(rng, N), float(sample_channel(rng, 1)[0]),
                            sigma, sigma, sigma, p_bar)
    return ch, sample_gain(rng, N)


class TestWorkedExamples:
    def test_air_single_sensor(self):
        ch = unit_channel()
        s = optimize_air_scaling(ch, [1.0])
        assert s.alpha == pytest.approx(0.5, abs=1e-15)
        assert s.beta[0] == pytest.approx(1.0, abs=1e-15)
        assert mse_air(s, ch, [1.0]) == pytest.approx(0.5, abs=1e-15)

    def test_sota_single_sensor(self):
        ch = unit_channel()
        s = optimize_sota_scaling(ch, [1.0])
        assert s.beta[0] == 1.0
        assert s.alpha_s[0] == pytest.approx(0.5, abs=1e-15)
        assert s.alpha_a == pytest.approx(1.0 / 3.0, abs=1e-15)
        assert mse_sota(s, ch, [1.0]) == pytest.approx(5.0 / 6.0, abs=1e-15)

    def test_air_mse_by_hand(self):
        ch = ChannelRealization([1.0, 2.0], sigma2=0.25)
        s = AirScaling(np.array([1.0, 0.5]), 2.0)
        # effective gain [2, 2]; error vs k=[1, 3] is [1, -1]
        assert mse_air(s, ch, [1.0, 3.0]) == pytest.approx(2.0 + 0.25 * 4.0)
        np.testing.assert_array_equal(effective_gain_air(s, ch), [2.0, 2.0])

    def test_sota_gain_by_hand(self):
        ch = ChannelRealization([1.0, 2.0], h_a=0.5)
        s = SotaScaling(np.array([1.0, 1.0]), np.array([2.0, 1.0]), 3.0)
        np.testing.assert_allclose(effective_gain_sota(s, ch), [3.0, 3.0])

    def test_air_beats_sota_on_single_sensor_example(self):
        ch = unit_channel()
        a = mse_air(optimize_air_scaling(ch, [1.0]), ch, [1.0])
        b = mse_sota(optimize_sota_scaling(ch, [1.0]), ch, [1.0])
        assert a < b


class TestAgainstOracles:
    @pytest.mark.parametrize("seed", range(15))
    def test_air_not_worse_than_grid(self, seed):
        ch, k = random_instance(make_stream(seed, 1))
        got = mse_air(optimize_air_scaling(ch, k), ch, k)
        _, ref = oracles.grid_min_air(ch.h, k, ch.p_bar, ch.sigma2, points=4000)
        assert got <= ref + 1e-6

    @pytest.mark.parametrize("seed", range(15))
    def test_sota_alpha_a_matches_grid(self, seed):
        ch, k = random_instance(make_stream(seed, 2))
        s = optimize_sota_scaling(ch, k)
        hi = 2.0 * abs(s.alpha_a) + 1.0
        a, ref, step = oracles.grid_min_alpha_a(s.alpha_s, s.beta, ch.h, ch.h_a, k,
                                                ch.sigma_s2, ch.sigma_a2, 0.0, hi, 4000)
        assert abs(a - s.alpha_a) <= step
        assert mse_sota(s, ch, k) <= ref + 1e-12 * max(1.0, ref)

    def test_sota_alpha_s_is_per_sensor_optimal(self):
        # with everything else fixed, perturbing any alpha_s entry cannot help the first hop
        ch, k = random_instance(make_stream(3, 3), N=4)
        s = optimize_sota_scaling(ch, k)
        d = ch.h * s.beta
        hop = lambda a: (a * d - k) ** 2 + ch.sigma_s2 * a**2
        for eps in (-1e-3, 1e-3):
            assert np.all(hop(s.alpha_s) <= hop(s.alpha_s + eps))

    def test_closed_form_vs_empirical(self):
        rng = make_stream(11, 0)
        ch, k = random_instance(rng, N=3)
        s = optimize_air_scaling(ch, k)
        mean, se = oracles.empirical_mse_air(s.beta, s.alpha, ch.h, k, ch.sigma2, 400_000, rng)
        assert abs(mse_air(s, ch, k) - mean) <= 4 * se
        t = optimize_sota_scaling(ch, k)
        mean, se = oracles.empirical_mse_sota(t.beta, t.alpha_s, t.alpha_a, ch.h, ch.h_a, k,
                                              ch.sigma_s2, ch.sigma_a2, 400_000, rng)
        assert abs(mse_sota(t, ch, k) - mean) <= 4 * se

    def test_batch_matches_scalar(self):
        rng = make_stream(5, 0)
        h = sample_channel(rng, 5, size=50)
        h_a = sample_channel(rng, 1, size=50)[:, 0]
        k = sample_gain(rng, 5, size=50)
        alpha, mse = optimize_air_alpha_batch(h, k, 1.5, 0.3)
        smse = sota_mse_batch(h, h_a, k, 1.5, 0.3, 0.3)
        for i in range(50):
            ch = ChannelRealization(h[i], h_a[i], 0.3, 0.3, 0.3, 1.5)
            s = optimize_air_scaling(ch, k[i])
            assert s.alpha == pytest.approx(alpha[i], rel=1e-12)
            assert mse_air(s, ch, k[i]) == pytest.approx(mse[i], rel=1e-9)
            assert mse_sota(optimize_sota_scaling(ch, k[i]), ch, k[i]) == pytest.approx(smse[i], rel=1e-9)


class TestInvariants:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_power_constraint_and_positivity(self, seed):
        ch, k = random_instance(np.random.default_rng(seed))
        s = optimize_air_scaling(ch, k)
        assert s.alpha >= 0.0
        assert np.all(s.beta >= 0.0)
        assert np.all(s.beta**2 <= ch.p_bar * (1 + 1e-12))
        t = optimize_sota_scaling(ch, k)
        assert np.all(t.beta**2 <= ch.p_bar * (1 + 1e-12))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_mse_bounded_by_zero_control(self, seed):
        # alpha = 0 (send nothing) costs exactly k^T k, so the optimum never exceeds it
        ch, k = random_instance(np.random.default_rng(seed))
        kk = float(k @ k)
        assert 0.0 <= mse_air(optimize_air_scaling(ch, k), ch, k) <= kk * (1 + 1e-12)
        assert 0.0 <= mse_sota(optimize_sota_scaling(ch, k), ch, k) <= kk * (1 + 1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_beta_is_clipped_inversion(self, seed):
        ch, k = random_instance(np.random.default_rng(seed))
        s = optimize_air_scaling(ch, k)
        np.testing.assert_allclose(s.beta, clipped_inversion(s.alpha, ch, k))
        assert mse_air(s, ch, k) == pytest.approx(air_objective(s.alpha, ch, k), rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 10.0))
    def test_gain_scale_covariance(self, seed, c):
        # scaling k by c scales the optimal receive scale by c and the MSE by c^2
        ch, k = random_instance(np.random.default_rng(seed))
        s1 = optimize_air_scaling(ch, k)
        s2 = optimize_air_scaling(ch, c * k)
        assert s2.alpha == pytest.approx(c * s1.alpha, rel=1e-9)
        assert mse_air(s2, ch, c * k) == pytest.approx(c * c * mse_air(s1, ch, k), rel=1e-9)
        # the multi-hop MSE needs the actuator-hop noise scaled by c^2 as well
        ch2 = ChannelRealization(ch.h, ch.h_a, ch.sigma2, ch.sigma_s2, ch.sigma_a2 * c * c, ch.p_bar)
        t1, t2 = optimize_sota_scaling(ch, k), optimize_sota_scaling(ch2, c * k)
        assert mse_sota(t2, ch2, c * k) == pytest.approx(c * c * mse_sota(t1, ch, k), rel=1e-9)

    def test_monotone_in_noise_and_power(self):
        ch, k = random_instance(make_stream(9, 0), N=6, sigma=0.5, p_bar=2.5)
        def air(sigma2, p_bar):
            c = ChannelRealization(ch.h, ch.h_a, sigma2, sigma2, sigma2, p_bar)
            return mse_air(optimize_air_scaling(c, k), c, k)
        noise = [air(s, 2.5) for s in np.linspace(0.05, 1.0, 12)]
        power = [air(0.5, p) for p in np.linspace(0.1, 5.0, 12)]
        assert all(a <= b + 1e-12 for a, b in zip(noise, noise[1:]))
        assert all(a >= b - 1e-12 for a, b in zip(power, power[1:]))

    def test_air_objective_continuous_at_breakpoints(self):
        ch, k = random_instance(make_stream(4, 0), N=5)
        for a in k / (ch.h * math.sqrt(ch.p_bar)):
            lo = air_objective(a * (1 - 1e-10), ch, k)
            hi = air_objective(a * (1 + 1e-10), ch, k)
            assert lo == pytest.approx(hi, rel=1e-7)


class TestLimits:
    def test_noiseless_air_collapses(self):
        ch = ChannelRealization([0.5, 1.3, 2.0], sigma2=0.0, sigma_s2=0.0, sigma_a2=0.0, p_bar=4.0)
        k = np.array([1.0, 2.0, 3.0])
        assert mse_air(optimize_air_scaling(ch, k), ch, k) <= 1e-12

    def test_noiseless_sota_collapses(self):
        ch = ChannelRealization([0.5, 1.3, 2.0], h_a=0.7, sigma2=0.0, sigma_s2=0.0, sigma_a2=0.0)
        k = np.array([1.0, 2.0, 3.0])
        assert mse_sota(optimize_sota_scaling(ch, k), ch, k) <= 1e-12

    def test_unconstrained_limit_is_pure_noise(self):
        ch = unit_channel(sigma2=0.3)
        for alpha in (1.0, 0.1, 0.01):
            _, m = unconstrained_air_limit(ch, [2.0], alpha)
            assert m == pytest.approx(0.3 * alpha**2, abs=1e-15)

    def test_zero_gain(self):
        ch = unit_channel(h=[1.0, 1.0])
        s = optimize_air_scaling(ch, [0.0, 0.0])
        assert s.alpha == 0.0 and mse_air(s, ch, [0.0, 0.0]) == 0.0
        assert mse_sota(optimize_sota_scaling(ch, [0.0, 0.0]), ch, [0.0, 0.0]) == 0.0


class TestErrors:
    def test_zero_actuator_channel(self):
        with pytest.raises(DegenerateChannelError):
            optimize_sota_scaling(unit_channel(h_a=0.0), [1.0])

    def test_batch_nan_on_zero_actuator_channel(self):
        out = sota_mse_batch(np.ones((2, 1)), np.array([0.0, 1.0]), np.ones((2, 1)), 1.0, 1.0, 1.0)
        assert math.isnan(out[0]) and math.isfinite(out[1])

    def test_gain_length(self):
        with pytest.raises(DimensionError):
            optimize_air_scaling(unit_channel(), [1.0, 2.0])

    @pytest.mark.parametrize("kw", [dict(h=[0.0]), dict(h=[-1.0]), dict(sigma2=-1.0),
                                    dict(p_bar=0.0), dict(h_a=math.inf), dict(h=[])])
    def test_bad_channel(self, kw):
        with pytest.raises(ValidationError):
            unit_channel(**kw)

    def test_negative_gain(self):
        with pytest.raises(ValidationError):
            optimize_air_scaling(unit_channel(), [-1.0])


@pytest.mark.parametrize("factor", [0.9, 1.1])
def test_sota_example_beats_perturbed_actuator_scale(factor):
    ch = unit_channel()
    s = optimize_sota_scaling(ch, [1.0])
    worse = SotaScaling(s.beta, s.alpha_s, s.alpha_a * factor)
    assert mse_sota(s, ch, [1.0]) < mse_sota(worse, ch, [1.0])
