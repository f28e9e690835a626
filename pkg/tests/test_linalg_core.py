import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from aircont.errors import DimensionError, ValidationError
from aircont.linalg_core import MAX_DIM, eigenvalues, mat_exp, phi_gamma, spectral_radius
from aircont.oracles import input_integral, power_iteration_radius, taylor_expm


def small_matrix(n_min=1, n_max=6, bound=1.0):
    return st.integers(n_min, n_max).flatmap(
        lambda n: arrays(np.float64, (n, n),
                         elements=st.floats(-bound, bound, allow_nan=False, width=64)))


class TestMatExp:
    def test_zero_matrix_gives_identity(self):
        np.testing.assert_array_equal(mat_exp(np.zeros((4, 4)), 1.0), np.eye(4))

    def test_nilpotent_closed_form(self):
        np.testing.assert_allclose(mat_exp([[0.0, 1.0], [0.0, 0.0]], 3.0),
                                   [[1.0, 3.0], [0.0, 1.0]], atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_taylor_oracle(self, seed):
        M = np.random.default_rng(seed).uniform(-1.0, 1.0, (4, 4))
        np.testing.assert_allclose(mat_exp(M, 0.5), taylor_expm(M, 0.5), rtol=0, atol=1e-9)

    @pytest.mark.parametrize("scale", [0.001, 0.1, 1.0, 4.0, 20.0])
    def test_every_pade_degree_matches_taylor(self, scale):
        # spans the 3/5/7/9/13 degree branches and the squaring path
        M = np.random.default_rng(11).uniform(-1.0, 1.0, (3, 3)) * scale / 3.0
        ref = taylor_expm(M, 1.0, terms=120)
        err = np.max(np.abs(mat_exp(M) - ref)) / np.max(np.abs(ref))
        assert err <= 1e-12

    def test_large_norm_relative_accuracy(self):
        D = np.diag([-40.0, -3.0, 2.0])
        Q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((3, 3)))
        M = Q @ D @ Q.T
        expected = Q @ np.diag(np.exp(np.diag(D) * 2.0)) @ Q.T
        err = np.linalg.norm(mat_exp(M, 2.0) - expected, 1) / np.linalg.norm(expected, 1)
        assert err <= 1e-10

    @settings(max_examples=40, deadline=None)
    @given(small_matrix(), st.floats(0.0, 1.5), st.floats(0.0, 1.5))
    def test_semigroup(self, M, s, t):
        lhs = mat_exp(M, s + t)
        rhs = mat_exp(M, s) @ mat_exp(M, t)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-8 * max(1.0, np.abs(lhs).max()))

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            mat_exp(np.zeros((2, 3)), 1.0)

    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            mat_exp([[np.nan, 0.0], [0.0, 1.0]], 1.0)
        with pytest.raises(ValidationError):
            mat_exp(np.eye(2), math.inf)

    def test_dimension_cap(self):
        with pytest.raises(DimensionError):
            mat_exp(np.zeros((MAX_DIM + 1, MAX_DIM + 1)))


class TestPhiGamma:
    def test_zero_dynamics(self):
        Phi, G = phi_gamma(np.zeros((2, 2)), [1.0, 2.0], 2.0)
        np.testing.assert_allclose(Phi, np.eye(2), rtol=0, atol=1e-15)
        np.testing.assert_allclose(G, [2.0, 4.0], atol=1e-15)

    @pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 2.5])
    def test_double_integrator(self, t):
        _, G = phi_gamma([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0], t)
        np.testing.assert_allclose(G, [t * t / 2.0, t], atol=1e-14)

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_quadrature(self, seed):
        rng = np.random.default_rng(100 + seed)
        A = rng.uniform(-1.0, 1.0, (4, 4))
        b = rng.uniform(-1.0, 1.0, 4)
        Phi, G = phi_gamma(A, b, 0.1)
        np.testing.assert_allclose(G, input_integral(A, b, 0.0, 0.1), rtol=0, atol=1e-9)
        np.testing.assert_allclose(Phi, taylor_expm(A, 0.1), rtol=0, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(small_matrix(), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
    def test_integral_additivity(self, A, t1, t2):
        b = np.linspace(-1.0, 1.0, A.shape[0])
        _, G12 = phi_gamma(A, b, t1 + t2)
        _, G1 = phi_gamma(A, b, t1)
        Phi2, G2 = phi_gamma(A, b, t2)
        np.testing.assert_allclose(G12, Phi2 @ G1 + G2, rtol=0, atol=1e-8)

    def test_negative_length_rejected(self):
        with pytest.raises(ValidationError):
            phi_gamma(np.eye(2), [1.0, 0.0], -0.1)

    def test_b_length_checked(self):
        with pytest.raises(DimensionError):
            phi_gamma(np.eye(2), [1.0, 0.0, 0.0], 0.1)


class TestSpectralRadius:
    def test_diagonal(self):
        assert spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9, abs=1e-15)

    def test_rotation(self):
        assert spectral_radius([[0.0, 1.0], [-1.0, 0.0]]) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("seed", range(8))
    def test_power_iteration_oracle(self, seed):
        M = np.random.default_rng(seed).uniform(-1.0, 1.0, (5, 5))
        assert spectral_radius(M) == pytest.approx(power_iteration_radius(M, seed=seed), abs=1e-6)

    @pytest.mark.parametrize("n", [2, 5, 9, 16])
    def test_cyclic_permutation(self, n):
        # all eigenvalues on the unit circle; plain Francis shifts stall here
        P = np.roll(np.eye(n), 1, axis=0)
        assert spectral_radius(P) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("n", [3, 7, 12, 17])
    def test_known_spectrum(self, n):
        rng = np.random.default_rng(n)
        lam = rng.uniform(-2.0, 2.0, n)
        V = rng.standard_normal((n, n)) + 3.0 * np.eye(n)
        M = V @ np.diag(lam) @ np.linalg.inv(V)
        assert spectral_radius(M) == pytest.approx(np.max(np.abs(lam)), abs=1e-8)

    def test_all_eigenvalues_match_characteristic_roots(self):
        M = np.random.default_rng(5).standard_normal((6, 6))
        ours = sorted(eigenvalues(M), key=lambda z: (round(z.real, 8), round(z.imag, 8)))
        ref = sorted(np.roots(np.poly(M)), key=lambda z: (round(z.real, 8), round(z.imag, 8)))
        np.testing.assert_allclose(ours, ref, atol=1e-7)

    @settings(max_examples=50, deadline=None)
    @given(small_matrix(2, 8, 5.0), st.floats(-3.0, 3.0))
    def test_homogeneity(self, M, c):
        assert spectral_radius(c * M) == pytest.approx(abs(c) * spectral_radius(M),
                                                       abs=1e-8 * max(1.0, np.abs(M).max()))

    @settings(max_examples=50, deadline=None)
    @given(small_matrix(1, 10, 10.0))
    def test_bounded_by_induced_norm(self, M):
        assert spectral_radius(M) <= np.max(np.sum(np.abs(M), axis=1)) * (1 + 1e-12) + 1e-12

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            spectral_radius(np.zeros((3, 2)))
