import math

import numpy as np
import pytest

from dmdaudit.synth import CausalGraphSpec, draw_var_coefficients, gen_var
from dmdaudit.var import (
    check_var_stability,
    companion_matrix,
    fit_var,
    residuals,
    select_order,
)


def ar1_series(phi, m, x0=1.0):
    x = np.empty(m)
    x[0] = x0
    for k in range(1, m):
        x[k] = phi * x[k - 1]
    return x


def full_spec(dims, order, seed, **kw):
    adjacency = tuple(tuple(1 for _ in range(dims)) for _ in range(dims))
    return CausalGraphSpec(dims=dims, order=order, adjacency=adjacency, seed=seed, **kw)


class TestFitVar:
    def test_deterministic_ar1(self):
        x = ar1_series(0.5, 50)
        model = fit_var(x, 1)
        assert abs(model.coeffs[0][0, 0] - 0.5) <= 1e-10
        assert abs(model.intercept[0]) <= 1e-10
        assert abs(model.residual_cov[0, 0]) <= 1e-18

    def test_monte_carlo_recovery(self):
        spec = CausalGraphSpec(dims=2, order=1, adjacency=((1, 1), (0, 1)), seed=42)
        truth = draw_var_coefficients(spec)
        ts = gen_var(spec, 5000)
        model = fit_var(ts.data, 1)
        assert np.max(np.abs(model.coeffs[0] - truth[0])) <= 0.05

    def test_white_noise_coefficients_near_zero(self):
        rng = np.random.default_rng(7)
        data = rng.normal(size=(2, 5000))
        model = fit_var(data, 1)
        assert np.max(np.abs(model.coeffs[0])) < 0.05

    def test_insufficient_samples(self):
        with pytest.raises(ValueError, match="insufficient"):
            fit_var(np.random.default_rng(0).normal(size=(2, 6)), 2)

    def test_rank_deficient_warns(self):
        x = ar1_series(0.9, 60)
        data = np.vstack([x, x])  # duplicated channel
        with pytest.warns(RuntimeWarning, match="rank-deficient"):
            fit_var(data, 1)

    def test_gram_matches_definition(self):
        rng = np.random.default_rng(8)
        data = rng.normal(size=(2, 60))
        model = fit_var(data, 2)
        t = data.shape[1] - 2
        z = np.vstack([np.ones(t), data[:, 1:-1], data[:, 0:-2]])
        assert np.allclose(model.regressor_gram, z @ z.T, atol=1e-9)

    def test_residual_cov_divisor(self):
        rng = np.random.default_rng(9)
        data = rng.normal(size=(2, 200))
        model = fit_var(data, 1)
        res = residuals(model, data)
        t_eff = data.shape[1] - 1
        expected = res @ res.T / (t_eff - 3)  # q = n p + 1 = 3 regressors
        assert np.allclose(model.residual_cov, expected, atol=1e-12)

    def test_no_intercept_mode(self):
        x = ar1_series(0.7, 80)
        model = fit_var(x, 1, with_intercept=False)
        assert model.regressor_gram.shape == (1, 1)
        assert np.all(model.intercept == 0)
        assert abs(model.coeffs[0][0, 0] - 0.7) <= 1e-10


class TestResiduals:
    def test_exact_fit_zero_residuals(self):
        x = ar1_series(0.5, 40)
        model = fit_var(x, 1)
        assert np.max(np.abs(residuals(model, x))) <= 1e-10

    def test_residual_mean_zero_with_intercept(self):
        ts = gen_var(full_spec(2, 1, seed=10), 2000)
        model = fit_var(ts.data, 1)
        res = residuals(model, ts.data)
        assert np.max(np.abs(res.mean(axis=1))) <= 1e-10

    def test_matches_direct_formula(self):
        ts = gen_var(full_spec(2, 2, seed=11), 500)
        model = fit_var(ts.data, 2)
        data = ts.data
        direct = np.empty((2, data.shape[1] - 2))
        for t in range(2, data.shape[1]):
            pred = model.intercept + model.coeffs[0] @ data[:, t - 1] + model.coeffs[1] @ data[:, t - 2]
            direct[:, t - 2] = data[:, t] - pred
        assert np.allclose(residuals(model, data), direct, atol=1e-12)

    def test_orthogonal_to_regressors(self):
        ts = gen_var(full_spec(3, 1, seed=12), 1000)
        model = fit_var(ts.data, 1)
        res = residuals(model, ts.data)
        lagged = ts.data[:, :-1]
        cross = res @ lagged.T
        scale = np.linalg.norm(res) * np.linalg.norm(lagged)
        assert np.max(np.abs(cross)) <= 1e-8 * scale

    def test_extra_channel_leaves_estimates(self):
        spec = CausalGraphSpec(dims=2, order=1, adjacency=((1, 1), (1, 1)), seed=13)
        ts = gen_var(spec, 5000)
        model2 = fit_var(ts.data, 1)
        rng = np.random.default_rng(13)
        data3 = np.vstack([ts.data, rng.normal(size=ts.samples)])
        model3 = fit_var(data3, 1)
        assert np.max(np.abs(model3.coeffs[0][:2, :2] - model2.coeffs[0])) <= 0.05


class TestSelectOrder:
    def test_penalty_terms(self):
        # direct evaluation: n=2, T=100, p=3 gives AIC penalty 0.24 and
        # BIC penalty ln(100)*12/100
        n, t_eff, p = 2, 100, 3
        aic_pen = 2 * p * n * n / t_eff
        bic_pen = math.log(t_eff) * p * n * n / t_eff
        assert np.isclose(aic_pen, 0.24)
        assert np.isclose(bic_pen, 0.5526, atol=5e-5)

    def test_bic_recovers_var2(self):
        ts = gen_var(full_spec(2, 2, seed=11), 5000)
        sel = select_order(ts.data, p_max=6, criterion="bic")
        assert sel.chosen == 2
        assert len(sel.scores) == 6
        assert sel.orders == (1, 2, 3, 4, 5, 6)

    def test_white_noise_chooses_one(self):
        rng = np.random.default_rng(14)
        data = rng.normal(size=(2, 3000))
        sel = select_order(data, p_max=5, criterion="bic")
        assert sel.chosen == 1

    def test_bic_at_least_aic_for_long_series(self):
        ts = gen_var(full_spec(2, 1, seed=15), 1000)
        aic = select_order(ts.data, p_max=4, criterion="aic")
        bic = select_order(ts.data, p_max=4, criterion="bic")
        assert all(b >= a - 1e-12 for a, b in zip(aic.scores, bic.scores))

    def test_chosen_attains_minimum(self):
        ts = gen_var(full_spec(2, 2, seed=16), 2000)
        sel = select_order(ts.data, p_max=6)
        assert sel.scores[sel.chosen - 1] == min(sel.scores)

    def test_unknown_criterion(self):
        with pytest.raises(ValueError, match="criterion"):
            select_order(np.random.default_rng(0).normal(size=(1, 100)), 2, criterion="hqc")


class TestStability:
    def test_scalar_stable(self):
        x = ar1_series(0.5, 60)
        check = check_var_stability(fit_var(x, 1))
        assert check.stable
        assert np.isclose(check.root_magnitudes[0], 0.5, atol=1e-10)

    def test_unit_root_unstable(self):
        coeffs = np.array([[[1.0]]])
        model = fit_var(ar1_series(0.5, 30), 1)
        model = type(model)(
            order=1, dims=1, coeffs=coeffs, intercept=np.zeros(1),
            residual_cov=np.eye(1), effective_samples=29,
            regressor_gram=np.eye(2), with_intercept=True,
        )
        assert not check_var_stability(model).stable

    def test_var2_companion_matches_oracle(self):
        a1 = np.array([[0.5, 0.1], [0.0, 0.3]])
        a2 = np.array([[0.1, 0.0], [0.05, 0.2]])
        comp = companion_matrix(np.stack([a1, a2]))
        oracle = np.zeros((4, 4))
        oracle[:2, :2] = a1
        oracle[:2, 2:] = a2
        oracle[2:, :2] = np.eye(2)
        assert np.array_equal(comp, oracle)
        mags = np.sort(np.abs(np.linalg.eigvals(oracle)))[::-1]
        ts = gen_var(full_spec(2, 2, seed=17), 4000)
        model = fit_var(ts.data, 2)
        got = check_var_stability(model).root_magnitudes
        direct = np.sort(np.abs(np.linalg.eigvals(companion_matrix(model.coeffs))))[::-1]
        assert np.allclose(got, direct, atol=1e-10)

    def test_bounded_simulation_implies_stable(self):
        for seed in (18, 19, 20):
            spec = full_spec(2, 1, seed=seed)
            ts = gen_var(spec, 10000)
            assert np.all(np.isfinite(ts.data)) and np.max(np.abs(ts.data)) < 1e6
            model = fit_var(ts.data, 1)
            assert check_var_stability(model).stable
