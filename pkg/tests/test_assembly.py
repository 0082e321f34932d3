"""Discrete operator structure, brute-force oracle agreement, conservation."""
import dataclasses

import numpy as np
import pytest

from flocsolve.assembly import (DiscreteModel, SpectralWorkspace, apply_aggregation,
                                apply_breakage, apply_growth_removal, build_model,
                                jacobian, jacobian_fd, residual)
from flocsolve.rates import ModelRates, ParamSet, beta22_density, build_rates
from flocsolve.theory import linear_exact

from conftest import (make_smooth_rates, oracle_aggregation, oracle_breakage,
                      oracle_growth_removal, smooth_ka, smooth_ka_base)


def _zero1(x):
    return np.zeros(np.shape(x))


def _zero2(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


@pytest.fixture(scope="module")
def smooth_model(smooth_rates):
    return build_model(smooth_rates, 32)


@pytest.fixture(scope="module")
def u_exp(smooth_model):
    return np.exp(-smooth_model.grid.nodes)


class TestOperatorAlgebra:
    def test_aggregation_of_zero(self, smooth_model):
        np.testing.assert_array_equal(
            apply_aggregation(smooth_model, np.zeros(33)), np.zeros(33))

    def test_zero_kernel_gives_zero(self, smooth_rates, u_exp):
        rates = dataclasses.replace(smooth_rates, agg_kernel=_zero2, agg_kernel_base=_zero2)
        model = build_model(rates, 32)
        np.testing.assert_array_equal(apply_aggregation(model, u_exp), np.zeros(33))

    def test_zero_frag_gives_zero(self, smooth_rates, u_exp):
        rates = dataclasses.replace(smooth_rates, frag_kernel=_zero1)
        model = build_model(rates, 32)
        np.testing.assert_array_equal(apply_breakage(model, u_exp), np.zeros(33))

    def test_aggregation_quadratic_scaling(self, smooth_model, u_exp):
        base = apply_aggregation(smooth_model, u_exp)
        scaled = apply_aggregation(smooth_model, 3.0 * u_exp)
        np.testing.assert_allclose(scaled, 9.0 * base, rtol=1e-12, atol=1e-15)

    def test_breakage_linear(self, smooth_model, u_exp):
        v = np.cos(smooth_model.grid.nodes)
        lhs = apply_breakage(smooth_model, 2.0 * u_exp + 3.0 * v)
        rhs = 2.0 * apply_breakage(smooth_model, u_exp) + 3.0 * apply_breakage(smooth_model, v)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-15)

    def test_growth_removal_linear(self, smooth_model, u_exp):
        v = np.cos(smooth_model.grid.nodes)
        lhs = apply_growth_removal(smooth_model, 2.0 * u_exp - v)
        rhs = (2.0 * apply_growth_removal(smooth_model, u_exp)
               - apply_growth_removal(smooth_model, v))
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-13)


class TestGrowthRemovalExamples:
    def _model(self, growth, removal, n=16):
        rates = make_smooth_rates(growth=growth, removal=removal)
        return build_model(rates, n)

    def test_constant_density_unit_growth(self):
        model = self._model(lambda x: np.ones(np.shape(x)), _zero1)
        out = apply_growth_removal(model, np.full(17, 4.2))
        np.testing.assert_allclose(out, 0.0, atol=1e-11)

    def test_identity_density_unit_growth(self):
        model = self._model(lambda x: np.ones(np.shape(x)), _zero1)
        out = apply_growth_removal(model, model.grid.nodes.copy())
        np.testing.assert_allclose(out, -1.0, atol=1e-11)

    def test_affine_growth_with_removal(self):
        model = self._model(lambda x: np.asarray(x, dtype=float) + 1.0,
                            lambda x: np.asarray(x, dtype=float))
        out = apply_growth_removal(model, np.ones(17))
        np.testing.assert_allclose(out, -1.0 - model.grid.nodes, atol=1e-11)


class TestOracleEquivalence:
    """Dense trapezoid / central-difference discretisations of the continuum
    operators, on rates whose integrands are smooth."""

    def test_aggregation(self, smooth_model, u_exp):
        got = apply_aggregation(smooth_model, u_exp)
        want = oracle_aggregation(smooth_model.rates, lambda y: np.exp(-y),
                                  smooth_model.grid.nodes)
        assert np.abs(got - want).max() < 1e-5

    def test_breakage(self, smooth_model, u_exp):
        got = apply_breakage(smooth_model, u_exp)
        want = oracle_breakage(smooth_model.rates, lambda y: np.exp(-y),
                               smooth_model.grid.nodes)
        assert np.abs(got - want).max() < 1e-5

    def test_growth_removal(self, smooth_model, u_exp):
        got = apply_growth_removal(smooth_model, u_exp)
        want = oracle_growth_removal(smooth_model.rates, lambda y: np.exp(-y),
                                     smooth_model.grid.nodes)
        assert np.abs(got - want).max() < 1e-5

    def test_shear_kernel_sanity(self, ref_rates):
        # cube-root kernel factors limit node-sampled quadrature to ~1e-4
        # here; this documents the achieved level rather than spectral limits
        model = build_model(ref_rates, 32)
        u = np.exp(-model.grid.nodes)
        got = apply_aggregation(model, u)
        want = oracle_aggregation(ref_rates, lambda y: np.exp(-y), model.grid.nodes)
        assert np.abs(got - want).max() < 1e-3


class TestConservation:
    def test_aggregation_first_moment(self, smooth_rates):
        model = build_model(smooth_rates, 48)
        u = np.exp(-model.grid.nodes)
        w, x = model.ops.weights, model.grid.nodes
        moment = (w * x) @ apply_aggregation(model, u)
        assert abs(moment) < 1e-6

    def test_breakage_first_moment(self, smooth_rates):
        model = build_model(smooth_rates, 48)
        u = np.exp(-model.grid.nodes)
        w, x = model.ops.weights, model.grid.nodes
        moment = (w * x) @ apply_breakage(model, u)
        assert abs(moment) < 1e-6

    def test_breakage_zeroth_moment(self, smooth_rates):
        # binary fragmentation increases particle count by half the broken mass rate
        model = build_model(smooth_rates, 48)
        u = np.exp(-model.grid.nodes)
        w = model.ops.weights
        got = w @ apply_breakage(model, u)
        want = 0.5 * (w * model.kf_nodes) @ u
        assert abs(got - want) < 1e-6


class TestResidual:
    def test_inflow_row_zero_at_normalised_state(self, smooth_model):
        u = np.ones(33)
        u[0] = 1.0 / smooth_model.g_nodes[0]
        assert residual(smooth_model, u, "ivp")[0] == 0.0

    def test_linear_solution_near_kernel_free_residual(self, ref_params):
        rates = dataclasses.replace(build_rates(ref_params),
                                    agg_kernel=_zero2, agg_kernel_base=_zero2,
                                    frag_kernel=_zero1)
        model = build_model(rates, 30)
        u = np.asarray(linear_exact(rates, model.grid.nodes))
        assert np.abs(residual(model, u, "ivp")).max() <= 1e-9

    def test_bvp_zero_renewal_forces_origin(self, smooth_rates):
        rates = dataclasses.replace(smooth_rates, renewal_shape=_zero1)
        model = build_model(rates, 16)
        u = np.ones(17)
        r = residual(model, u, "bvp", c_q=2.0)
        assert r[0] == model.g_nodes[0] * u[0]

    def test_bvp_requires_positive_cq(self, smooth_model):
        with pytest.raises(ValueError):
            residual(smooth_model, np.ones(33), "bvp")
        with pytest.raises(ValueError):
            residual(smooth_model, np.ones(33), "bvp", c_q=-1.0)

    def test_non_finite_state_rejected(self, smooth_model):
        u = np.ones(33)
        u[5] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            residual(smooth_model, u)

    def test_wrong_length_rejected(self, smooth_model):
        with pytest.raises(ValueError):
            residual(smooth_model, np.ones(7))

    def test_unknown_mode_rejected(self, smooth_model):
        with pytest.raises(ValueError):
            residual(smooth_model, np.ones(33), "dirichlet")


class TestJacobian:
    def test_matches_finite_differences(self, ref_rates):
        model = build_model(ref_rates, 24)
        rng = np.random.default_rng(42)
        u = rng.uniform(0.2, 1.5, 25)
        J = jacobian(model, u)
        Jfd = jacobian_fd(model, u)
        scale = np.abs(Jfd).max(axis=0) + 1.0
        assert (np.abs(J - Jfd).max(axis=0) / scale).max() < 1e-5

    def test_bvp_jacobian_matches_fd(self, smooth_model):
        rng = np.random.default_rng(11)
        u = rng.uniform(0.2, 1.5, 33)
        J = jacobian(smooth_model, u, "bvp", c_q=1.5)
        Jfd = jacobian_fd(smooth_model, u, "bvp", c_q=1.5)
        scale = np.abs(Jfd).max() + 1.0
        assert np.abs(J - Jfd).max() / scale < 1e-6

    def test_directional_derivative(self, smooth_model, u_exp):
        rng = np.random.default_rng(5)
        v = rng.normal(size=33)
        eps = 1e-6
        J = jacobian(smooth_model, u_exp)
        num = (residual(smooth_model, u_exp + eps * v)
               - residual(smooth_model, u_exp - eps * v)) / (2 * eps)
        np.testing.assert_allclose(J @ v, num, rtol=0, atol=1e-7)


class TestDiscreteModel:
    def test_shared_workspace_reuse(self, smooth_rates, ref_rates):
        ws = SpectralWorkspace(20, 1.0)
        m1 = DiscreteModel(smooth_rates, ws)
        m2 = DiscreteModel(ref_rates, ws)
        assert m1.workspace is m2.workspace
        assert not np.array_equal(m1.loss_matrix, m2.loss_matrix)

    def test_nonpositive_growth_rejected(self, smooth_rates):
        bad = dataclasses.replace(smooth_rates, growth=lambda x: -np.ones(np.shape(x)))
        with pytest.raises(ValueError, match="growth"):
            build_model(bad, 8)

    def test_max_size_mismatch_rejected(self, smooth_rates):
        ws = SpectralWorkspace(8, 2.0)
        with pytest.raises(ValueError, match="max_size"):
            DiscreteModel(smooth_rates, ws)

    def test_gain_vanishes_at_origin_row(self, smooth_model, u_exp):
        # x_0 = 0: empty convolution interval
        assert apply_aggregation(smooth_model, u_exp)[0] == -u_exp[0] * (
            smooth_model.loss_matrix[0] @ u_exp)
