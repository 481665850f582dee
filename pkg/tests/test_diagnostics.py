from __future__ import annotations

import numpy as np
import numpy.testing as nptest
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spsg.diagnostics import (
    convergence_order,
    discrete_mass,
    entropy_production,
    entropy_report,
    l1_relative_error,
    l2_coeff_norm,
    log_mean,
    mass_drift,
    relative_entropy,
)
from spsg.grid import build_grid
from spsg.sp import discrete_steady_state, rhs, workspace_from_lambda
from spsg.stepping import advance, explicit_dt_bound

seeds = st.integers(0, 2**31 - 1)
grid10 = build_grid(0, 1, 10)


def random_setup(seed, n=10):
    rng = np.random.default_rng(seed)
    grid = build_grid(0, 1, n)
    ws = workspace_from_lambda(rng.uniform(-4, 4, n - 1), rng.uniform(0.05, 1.0, n - 1), grid.dv)
    ref = discrete_steady_state(ws, 1.0)
    f = rng.uniform(0.1, 3.0, n)
    return grid, ws, ref, f / (grid.dv * f.sum())


class TestNorms:
    def test_mass(self):
        f = np.ones((3, 10))
        f[1] *= 2
        nptest.assert_allclose(discrete_mass(f, grid10), [1, 2, 1])
        assert discrete_mass(f, grid10, 1) == pytest.approx(2.0)

    def test_l2(self):
        assert l2_coeff_norm(np.ones((2, 10)), grid10) == pytest.approx(np.sqrt(2.0))

    def test_l1(self):
        assert l1_relative_error(np.array([1.0, 1.0]), np.array([1.0, 2.0])) == pytest.approx(1 / 3)
        assert l1_relative_error(np.array([3.0]), np.array([3.0])) == 0.0
        with pytest.raises(ValueError):
            l1_relative_error(np.ones(2), np.zeros(2))

    def test_drift(self):
        nptest.assert_allclose(mass_drift([1.0, 1e-3], [1.0, 0.0], [1.0, 2.0]), [0.0, 5e-4])

    def test_order(self):
        assert convergence_order(4e-2, 1e-2) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            convergence_order(0.0, 1.0)


class TestLogMean:
    def test_oracle(self):
        assert log_mean(1.0, 2.0) == pytest.approx(1.3862943611198906188, rel=1e-15)

    def test_equal(self):
        assert log_mean(3.0, 3.0) == 3.0
        assert log_mean(3.0, 3.0 * (1 + 1e-13)) == pytest.approx(3.0, rel=1e-12)

    @given(st.floats(1e-100, 1e100), st.floats(1e-100, 1e100))
    def test_between_harmonic_and_geometric(self, a, b):
        m = log_mean(a, b)
        assert log_mean(b, a) == pytest.approx(m, rel=1e-13)
        harmonic = 2.0 / (1.0 / a + 1.0 / b)
        assert harmonic * (1 - 1e-12) <= m <= np.sqrt(a) * np.sqrt(b) * (1 + 1e-12)

    @given(st.floats(-30, 30))
    def test_equals_bernoulli_weight(self, lam):
        from spsg.sp import bernoulli

        a, b = 1.0, np.exp(-lam)
        assert log_mean(a, b) == pytest.approx(bernoulli(lam) * a, rel=1e-10)


class TestEntropy:
    def test_zero_at_reference(self):
        grid, ws, ref, _ = random_setup(0)
        h, ok = relative_entropy(ref, ref, grid)
        assert ok and h == 0.0
        i, ok = entropy_production(ref, ref, ws, grid)
        assert ok and i == pytest.approx(0.0, abs=1e-14)

    def test_invalid(self):
        grid, ws, ref, f = random_setup(0)
        f[3] = -1e-3
        h, ok = relative_entropy(f, ref, grid)
        assert not ok and np.isnan(h)
        i, ok = entropy_production(f, ref, ws, grid)
        assert not ok and np.isnan(i)
        f[3] = 0.0
        assert not relative_entropy(f, ref, grid)[1]

    @given(seeds)
    def test_production_nonnegative_and_gibbs(self, seed):
        grid, ws, ref, f = random_setup(seed)
        assert entropy_production(f, ref, ws, grid)[0] >= 0
        assert relative_entropy(f, ref, grid)[0] >= -1e-14

    @given(seeds)
    def test_dissipation_identity(self, seed):
        grid, ws, ref, f = random_setup(seed)
        dhdt = grid.dv * np.sum((np.log(f / ref) + 1.0) * rhs(f, ws))
        i, _ = entropy_production(f, ref, ws, grid)
        assert dhdt == pytest.approx(-i, rel=1e-9, abs=1e-12)

    def test_monotone_under_euler(self):
        grid, ws, ref, f = random_setup(11, n=30)
        dt = explicit_dt_bound(ws)
        hs = []
        for k in range(300):
            hs.append(relative_entropy(f, ref, grid)[0])
            f = advance(f, ws, k * dt, dt, "euler")
        assert np.all(np.diff(hs) <= 1e-14)

    def test_report(self):
        grid, ws, ref, f = random_setup(2)
        rep = entropy_report(np.array([f, -f]), np.array([ref, ref]), ws, grid)
        nptest.assert_array_equal(rep.h, [0, 1])
        nptest.assert_array_equal(rep.valid, [True, False])
        assert np.isnan(rep.entropy[1]) and rep.production[0] >= 0


class TestSpecExamples:
    def test_l1_examples(self):
        ref = np.array([1.0, 2.0, 3.0])
        assert l1_relative_error(2 * ref, ref) == pytest.approx(1.0)
        bumped = ref.copy()
        bumped[1] += 1e-3
        assert l1_relative_error(bumped, ref) == pytest.approx(1e-3 / 6.0)

    @given(seeds, st.floats(1e-3, 1e3))
    def test_l1_scale_invariant(self, seed, c):
        rng = np.random.default_rng(seed)
        row, ref = rng.uniform(0.1, 1, (2, 8))
        assert l1_relative_error(c * row, c * ref) == pytest.approx(l1_relative_error(row, ref), rel=1e-12)

    def test_scaled_reference(self):
        grid, ws, ref, _ = random_setup(4)
        mass = grid.dv * ref.sum()
        assert relative_entropy(3.0 * ref, ref, grid)[0] == pytest.approx(3.0 * mass * np.log(3.0), rel=1e-13)

    def test_gibbs_equal_masses(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            a, b = rng.uniform(0.01, 2, (2, 15))
            b *= a.sum() / b.sum()
            assert relative_entropy(a, b, grid10)[0] >= -1e-15

    def test_zero_and_constant_norms(self):
        grid = build_grid(-1, 1, 40)
        assert discrete_mass(np.zeros(40), grid) == 0.0
        assert discrete_mass(np.ones(40), grid) == pytest.approx(2.0)
        assert l2_coeff_norm(np.zeros((1, 40)), grid) == 0.0
        assert l2_coeff_norm(np.ones((1, 40)), grid) == pytest.approx(np.sqrt(2.0))
        assert convergence_order(0.3, 0.3) == 0.0

    def test_identity_first_order_in_step(self):
        # Test-1 frozen state: (H(t+d) - H(t))/d + I(t) -> 0 linearly in d under Euler micro-steps
        from spsg.grid import quad_rule
        from spsg.problems import OpinionConfig, opinion_background, opinion_initial_field, opinion_spec
        from spsg.gpc import build_basis
        from spsg.sp import build_workspace

        cfg = OpinionConfig()
        grid = build_grid(-1, 1, 21)
        ws = build_workspace(opinion_spec(cfg), opinion_background(cfg, grid), grid, quad_rule("G"))
        f = opinion_initial_field(cfg, grid, build_basis(2))[0]
        ref = discrete_steady_state(ws, grid.dv * f.sum())
        h0 = relative_entropy(f, ref, grid)[0]
        i0 = entropy_production(f, ref, ws, grid)[0]
        gaps = []
        for d in (1e-4, 5e-5, 2.5e-5):
            g = advance(f, ws, 0.0, d, "euler")
            gaps.append(abs((relative_entropy(g, ref, grid)[0] - h0) / d + i0))
        orders = np.log2(np.array(gaps[:-1]) / np.array(gaps[1:]))
        nptest.assert_allclose(orders, 1.0, atol=0.1)
