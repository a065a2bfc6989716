import numpy as np
import pytest

from stvarkit import harness, model, stationarity


class TestFixtures:
    def test_fixture_moduli_match_design(self):
        m1 = stationarity.stability_check(harness.LSTVAR1).moduli
        m2 = stationarity.stability_check(harness.LSTVAR2).moduli
        assert np.allclose(np.sort(m1), [0.5831, 0.7449], atol=5e-4)
        assert np.allclose(np.sort(m2), [0.9695, 0.98], atol=5e-4)

    def test_fixture_means(self):
        for params in (harness.LSTVAR1, harness.LSTVAR2):
            assert np.allclose(model.unconditional_mean(params, 0), [0.0, 1.0], atol=5e-13)
            assert np.allclose(model.unconditional_mean(params, 1), [2.0, -1.0], atol=5e-13)

    def test_shared_blocks(self):
        assert np.array_equal(harness.LSTVAR1.B, harness.LSTVAR2.B)
        assert np.array_equal(harness.LSTVAR1.nu, [2.5, 12.0])
        assert np.array_equal(harness.LSTVAR1.lam, [-0.5, 0.2])
        assert np.array_equal(harness.LSTVAR1.weight_params, [0.8, 5.0])


class TestStandardize:
    def test_reorders_and_flips_to_truth_convention(self):
        truth = harness.LSTVAR1
        scrambled = model.ParamVector(
            phi=truth.phi, A=truth.A,
            B=truth.B[:, :, [1, 0]] * np.array([1.0, -1.0])[None, None, :],
            weight_params=truth.weight_params,
            nu=truth.nu[[1, 0]],
            lam=truth.lam[[1, 0]] * np.array([1.0, -1.0]),
        )
        back = harness.standardize_to_truth(scrambled, truth)
        assert np.allclose(back.B, truth.B)
        assert np.allclose(back.nu, truth.nu)
        assert np.allclose(back.lam, truth.lam)

    def test_noop_on_conforming_params(self):
        back = harness.standardize_to_truth(harness.LSTVAR1, harness.LSTVAR1)
        assert np.array_equal(back.B, harness.LSTVAR1.B)


class TestRunMc:
    def test_zero_replications_is_empty_table(self):
        design = harness.McDesign(replications=0, sample_sizes=(100,))
        report = harness.run_mc(design)
        assert report.errors[100].shape == (0, len(report.names))
        assert np.all(np.isnan(report.mean_error[100]))

    def test_coordinate_names_cover_vector(self):
        names = harness.coordinate_names()
        assert len(names) == len(harness.flatten_params(harness.LSTVAR1))
        assert names[-1] == "lambda_2"
        assert "B_1_11" in names and "gamma" in names

    def test_small_smoke_run_and_csv(self, tmp_path):
        design = harness.McDesign(
            replications=2, sample_sizes=(400,), seed=5,
            rounds=1, generations=8, population=16, grid_points=5, refine_max_iter=40,
        )
        report = harness.run_mc(design)
        assert report.failures[400] == 0
        assert report.errors[400].shape == (2, len(report.names))
        # AR coefficients should land in a sane neighborhood even at T=400
        a_cols = [i for i, n in enumerate(report.names) if n.startswith("A_")]
        assert np.max(np.abs(report.mean_error[400][a_cols])) < 0.5
        out = tmp_path / "mc.csv"
        report.to_csv(out)
        text = out.read_text().splitlines()
        assert text[0] == "parameter,T,mean_error,sd"
        assert len(text) == 1 + len(report.names)
