import numpy as np
import pytest

from stvarkit import girf, model
from stvarkit.errors import ConfigError, EmptySelectionError


def analytic_linear_irf(A, B, shock, delta, H):
    out = np.empty((H + 1, B.shape[0]))
    v = B[:, shock] * delta
    for h in range(H + 1):
        out[h] = v
        v = A @ v
    return out


class TestGirfOne:
    def test_linear_matches_analytic_within_mc_error(self, linear_spec, linear_params):
        H, N = 12, 10000
        mean, std, rej = girf.girf_one(
            linear_spec, linear_params, [[0.5, 0.2]], 1.5, 0, H, N, seed=9
        )
        assert rej == 0
        oracle = analytic_linear_irf(linear_params.A[0, 0], linear_params.B[0], 0, 1.5, H)
        assert np.array_equal(mean[0, :2], oracle[0])  # impact row is exact
        se = std[1:, :2] / np.sqrt(N)
        assert np.all(np.abs(mean[1:, :2] - oracle[1:]) <= 3.0 * se)

    def test_null_shock(self, linear_spec, linear_params):
        mean, std, _ = girf.girf_one(
            linear_spec, linear_params, [[0.5, 0.2]], 0.0, 0, 6, 4000, seed=3
        )
        assert np.array_equal(mean[0], np.zeros(mean.shape[1]))
        se = std[1:] / np.sqrt(4000)
        assert np.all(np.abs(mean[1:]) <= 3.0 * se + 1e-12)

    def test_impact_row_identity(self, lstvar1_spec, lstvar1_params):
        hist = np.array([[0.9, -0.2]])
        mean, _, _ = girf.girf_one(lstvar1_spec, lstvar1_params, hist, 2.0, 1, 0, 50, seed=1)
        from scipy.special import expit

        a2 = expit(5.0 * (0.9 - 0.8))
        B = (1 - a2) * lstvar1_params.B[0] + a2 * lstvar1_params.B[1]
        assert np.allclose(mean[0, :2], B[:, 1] * 2.0, atol=1e-15)

    def test_weight_responses_sum_to_zero(self, lstvar1_spec, lstvar1_params):
        mean, _, _ = girf.girf_one(
            lstvar1_spec, lstvar1_params, [[0.9, -0.2]], 1.0, 0, 10, 500, seed=5
        )
        assert np.max(np.abs(mean[:, 2:].sum(axis=1))) <= 1e-12

    def test_linear_case_impact_scales_exactly(self, linear_spec, linear_params):
        m1, _, _ = girf.girf_one(linear_spec, linear_params, [[0.0, 0.0]], 1.0, 0, 4, 200, seed=7)
        m2, _, _ = girf.girf_one(linear_spec, linear_params, [[0.0, 0.0]], 2.0, 0, 4, 200, seed=7)
        assert np.allclose(m2[0, :2], 2.0 * m1[0, :2], atol=1e-15)

    def test_deterministic_given_seed(self, lstvar1_spec, lstvar1_params):
        a = girf.girf_one(lstvar1_spec, lstvar1_params, [[0.9, -0.2]], 1.0, 0, 5, 300, seed=11)
        b = girf.girf_one(lstvar1_spec, lstvar1_params, [[0.9, -0.2]], 1.0, 0, 5, 300, seed=11)
        assert np.array_equal(a[0], b[0])

    def test_exogenous_weights_rejected(self, lstvar1_params):
        spec = model.ModelSpec(
            d=2, p=1, M=2, weight_kind="exogenous", exog_table=np.full((10, 2), 0.5)
        )
        params = model.ParamVector(
            phi=lstvar1_params.phi, A=lstvar1_params.A, B=lstvar1_params.B,
            weight_params=[], nu=lstvar1_params.nu, lam=lstvar1_params.lam,
        )
        with pytest.raises(ConfigError):
            girf.girf_one(spec, params, [[0.0, 0.0]], 1.0, 0, 2, 10)


class TestSelectHistories:
    def test_zero_threshold_keeps_everything(self, lstvar1_spec, lstvar1_params, lstvar1_sim):
        hists, deltas, idx = girf.select_histories(
            lstvar1_spec, lstvar1_params, lstvar1_sim.data, 0, 0.0, 0
        )
        assert hists.shape[0] == lstvar1_sim.data.T
        assert np.allclose(deltas, lstvar1_sim.shocks[:, 0], atol=1e-8)

    def test_impossible_threshold_is_empty(self, lstvar1_spec, lstvar1_params, lstvar1_sim):
        with pytest.raises(EmptySelectionError):
            girf.select_histories(lstvar1_spec, lstvar1_params, lstvar1_sim.data, 1, 1.0, 0)

    def test_known_weight_path_selects_expected_subset(self, lstvar1_spec, lstvar1_params, lstvar1_sim):
        w = 0.75
        hists, _, idx = girf.select_histories(
            lstvar1_spec, lstvar1_params, lstvar1_sim.data, 1, w, 0
        )
        mask = lstvar1_sim.weights[:, 1] > w
        assert np.array_equal(idx, np.flatnonzero(mask))
        lags = model.lag_histories(lstvar1_sim.data, 1)
        assert np.array_equal(hists, lags[mask])


class TestGirfRun:
    def test_scaling_postcondition(self, lstvar1_spec, lstvar1_params, lstvar1_sim):
        req = girf.GirfRequest(
            shock_index=0, horizon=6, draws=100, regime=1, weight_threshold=0.9,
            scale_var=0, scale_size=5.0, seed=2,
        )
        small = model.Dataset(
            presample=lstvar1_sim.data.presample,
            body=lstvar1_sim.data.body[:200],
            names=lstvar1_sim.data.names,
        )
        res = girf.girf_run(req, lstvar1_spec, lstvar1_params, small)
        assert np.allclose(res.paths[:, 0, 0], 5.0, atol=1e-12)

    def test_accumulate_is_cumsum(self, lstvar1_spec, lstvar1_params, lstvar1_sim):
        small = model.Dataset(
            presample=lstvar1_sim.data.presample,
            body=lstvar1_sim.data.body[:150],
            names=lstvar1_sim.data.names,
        )
        base = girf.GirfRequest(
            shock_index=0, horizon=5, draws=60, regime=1, weight_threshold=0.9, seed=4
        )
        acc = girf.GirfRequest(
            shock_index=0, horizon=5, draws=60, regime=1, weight_threshold=0.9, seed=4,
            accumulate=(1,),
        )
        r0 = girf.girf_run(base, lstvar1_spec, lstvar1_params, small)
        r1 = girf.girf_run(acc, lstvar1_spec, lstvar1_params, small)
        assert np.allclose(r1.paths[:, :, 1], np.cumsum(r0.paths[:, :, 1], axis=1), atol=1e-12)
        assert np.array_equal(r1.paths[:, :, 0], r0.paths[:, :, 0])

    def test_scaling_idempotent(self):
        rng = np.random.default_rng(0)
        paths = rng.normal(size=(7, 5, 3))
        once, keep = girf.scale_paths(paths, 0, 2.5)
        twice, keep2 = girf.scale_paths(once, 0, 2.5)
        assert np.allclose(once, twice, atol=1e-14)
        assert np.all(keep2)

    def test_tiny_impact_dropped(self):
        paths = np.ones((3, 4, 2))
        paths[1, 0, 0] = 1e-14
        scaled, keep = girf.scale_paths(paths, 0, 1.0)
        assert scaled.shape[0] == 2
        assert list(keep) == [True, False, True]

    def test_explicit_histories_and_quantiles(self, lstvar1_spec, lstvar1_params):
        hists = np.array([[[0.2, 0.1]], [[1.5, -0.5]], [[0.9, 0.0]]])
        req = girf.GirfRequest(
            shock_index=1, horizon=4, draws=50, histories=hists, deltas=np.array([1.0, -2.0, 0.5]),
            seed=8,
        )
        res = girf.girf_run(req, lstvar1_spec, lstvar1_params)
        assert res.paths.shape == (3, 5, 4)
        assert res.quantiles.shape == (5, 5, 4)
        assert np.all(res.quantiles[0] <= res.quantiles[-1] + 1e-15)

    def test_seed_stability_of_quantile_bands(self, lstvar1_spec, lstvar1_params, lstvar1_sim):
        small = model.Dataset(
            presample=lstvar1_sim.data.presample,
            body=lstvar1_sim.data.body[:150],
            names=lstvar1_sim.data.names,
        )
        req1 = girf.GirfRequest(
            shock_index=0, horizon=4, draws=4000, regime=1, weight_threshold=0.9, seed=1
        )
        req2 = girf.GirfRequest(
            shock_index=0, horizon=4, draws=4000, regime=1, weight_threshold=0.9, seed=2
        )
        r1 = girf.girf_run(req1, lstvar1_spec, lstvar1_params, small)
        r2 = girf.girf_run(req2, lstvar1_spec, lstvar1_params, small)
        # per-history MC error ~ sd/sqrt(N); the median band moves much less
        gap = np.max(np.abs(r1.quantiles[2, :, :2] - r2.quantiles[2, :, :2]))
        assert gap < 0.1

    def test_request_validation(self):
        with pytest.raises(ConfigError):
            girf.GirfRequest(shock_index=0, horizon=-1)
        with pytest.raises(ConfigError):
            girf.GirfRequest(shock_index=0, draws=0)
        with pytest.raises(ConfigError):
            girf.GirfRequest(shock_index=0, scale_var=1)
