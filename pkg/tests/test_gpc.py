from __future__ import annotations

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spsg.gpc import (
    build_basis,
    confidence_band,
    eval_poly,
    project_function,
    reconstruct,
    reconstruct_mean,
    reconstruct_variance,
)

PHI = np.exp(-np.linspace(-1, 1, 7) ** 2)


class TestBasis:
    def test_order_zero(self):
        b = build_basis(0)
        nptest.assert_allclose(b.values, 1.0)
        nptest.assert_allclose(b.gram(), [[1.0]], atol=1e-15)

    @pytest.mark.parametrize("order", [0, 1, 2, 5, 10, 20])
    def test_orthonormal(self, order):
        g = build_basis(order).gram()
        assert np.max(np.abs(g - np.eye(order + 1))) <= 1e-12

    def test_minimal_rule_still_orthonormal(self):
        g = build_basis(6, n_theta=7).gram()
        assert np.max(np.abs(g - np.eye(7))) <= 1e-12

    def test_phi1_phi2_orthogonal(self):
        assert abs(build_basis(2).gram()[1, 2]) <= 1e-14

    def test_weights_sum_to_one(self):
        b = build_basis(4)
        assert b.theta_weights.sum() == pytest.approx(1.0, abs=1e-15)
        assert b.n_theta == 10

    def test_phi1_at_one(self):
        assert build_basis(1).evaluate(1.0)[1] == pytest.approx(np.sqrt(3.0), rel=1e-15)

    def test_rejects_bad_sizes(self):
        with pytest.raises(ValueError):
            build_basis(-1)
        with pytest.raises(ValueError):
            build_basis(4, n_theta=4)

    def test_matches_numpy_legendre(self):
        x = np.linspace(-1, 1, 11)
        b = build_basis(8)
        for h in range(9):
            c = np.zeros(h + 1)
            c[h] = 1.0
            nptest.assert_allclose(b.evaluate(x)[h], np.sqrt(2 * h + 1) * np.polynomial.legendre.legval(x, c), atol=1e-13)


class TestEvalPoly:
    def test_values(self):
        b = build_basis(3)
        assert eval_poly(b, 0, 0.7) == 1.0
        assert eval_poly(b, 2, 1.0) == pytest.approx(np.sqrt(5.0), rel=1e-15)
        assert eval_poly(b, 1, 0.0) == 0.0

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            eval_poly(build_basis(2), 3, 0.0)


class TestProjection:
    v = np.linspace(-1, 1, 7)

    def test_deterministic(self):
        f = project_function(build_basis(4), lambda t, v: PHI, self.v)
        nptest.assert_allclose(f[0], PHI, rtol=1e-14)
        assert np.max(np.abs(f[1:])) <= 1e-14

    def test_affine_in_theta(self):
        f = project_function(build_basis(3), lambda t, v: (1 + 0.5 * t) * PHI, self.v)
        nptest.assert_allclose(f[1], 0.5 / np.sqrt(3) * PHI, rtol=1e-13)

    def test_theta_squared(self):
        f = project_function(build_basis(2), lambda t, v: t * t * PHI, self.v)
        nptest.assert_allclose(f[0], PHI / 3, rtol=1e-13)

    def test_reconstruct_at_nodes(self):
        b = build_basis(4)
        data = lambda t, v: (1 + t - 2 * t**3 + 0.5 * t**4) * PHI
        f = project_function(b, data, self.v)
        for t in b.theta_nodes:
            nptest.assert_allclose(reconstruct(f, b, t), data(t, self.v), rtol=1e-12, atol=1e-14)

    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=5))
    def test_parseval(self, coeffs):
        order = len(coeffs) - 1
        b = build_basis(order)
        poly = np.polynomial.Polynomial(coeffs)
        f = project_function(b, lambda t, v: poly(t) * np.ones_like(v), np.zeros(1))
        quad = np.sum(b.theta_weights * poly(b.theta_nodes) ** 2)
        assert np.sum(f[:, 0] ** 2) == pytest.approx(quad, rel=1e-11, abs=1e-12)


class TestMoments:
    def test_mean_is_row_zero(self):
        f = np.array([2 * PHI, PHI, 0 * PHI])
        nptest.assert_array_equal(reconstruct_mean(f), 2 * PHI)
        nptest.assert_array_equal(reconstruct_mean(PHI[None]), PHI)

    def test_variance_formula(self):
        assert reconstruct_variance(np.array([[2.0], [1.0], [0.0]]))[0] == 1.0
        assert np.all(reconstruct_variance(np.array([PHI, 0 * PHI])) == 0)

    def test_variance_of_affine_data(self):
        b = build_basis(3)
        f = project_function(b, lambda t, v: (1 + 0.5 * t) * PHI, np.zeros(7))
        nptest.assert_allclose(reconstruct_variance(f, b), PHI**2 / 12, rtol=1e-13)

    def test_variance_checks_basis(self):
        with pytest.raises(ValueError):
            reconstruct_variance(np.ones((3, 4)), build_basis(3))

    def test_band(self):
        assert confidence_band(np.array([[2.0], [1.0]]))[0] == 3.0
        assert confidence_band(np.array([[0.0], [2.0]]))[0] == 2.0
        nptest.assert_array_equal(confidence_band(PHI[None]), PHI)

    @given(st.integers(0, 2**31 - 1))
    def test_variance_nonnegative(self, seed):
        f = np.random.default_rng(seed).normal(size=(4, 9))
        assert np.all(reconstruct_variance(f) >= 0)
