import json

import numpy as np
import pytest
from click.testing import CliRunner

from stvarkit import serde
from stvarkit.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def model_file(tmp_path, lstvar1_spec, lstvar1_params):
    path = tmp_path / "model.json"
    serde.write_model(path, lstvar1_spec, lstvar1_params, names=["u", "v"])
    return path


@pytest.fixture()
def data_file(tmp_path, runner, model_file):
    out = tmp_path / "data.csv"
    res = runner.invoke(
        main, ["simulate", str(model_file), "--T", "300", "--seed", "3", "--out", str(out)]
    )
    assert res.exit_code == 0, res.output
    return out


class TestSimulate:
    def test_row_count_matches_request(self, runner, model_file, tmp_path):
        out = tmp_path / "d.csv"
        res = runner.invoke(
            main, ["simulate", str(model_file), "--T", "250", "--out", str(out)]
        )
        assert res.exit_code == 0
        rows = [l for l in out.read_text().splitlines() if l and not l.startswith("#")]
        assert len(rows) == 251  # header + 250 periods

    def test_zero_periods_is_header_only(self, runner, model_file, tmp_path):
        out = tmp_path / "d.csv"
        res = runner.invoke(main, ["simulate", str(model_file), "--T", "0", "--out", str(out)])
        assert res.exit_code == 0
        rows = [l for l in out.read_text().splitlines() if l and not l.startswith("#")]
        assert rows == ["u,v"]

    def test_bad_model_file_exits_2(self, runner, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        res = runner.invoke(main, ["simulate", str(bad), "--out", str(tmp_path / "x.csv")])
        assert res.exit_code == 2

    def test_shock_record_written(self, runner, model_file, tmp_path):
        out, shocks = tmp_path / "d.csv", tmp_path / "s.csv"
        res = runner.invoke(
            main,
            ["simulate", str(model_file), "--T", "50", "--out", str(out),
             "--shocks-out", str(shocks)],
        )
        assert res.exit_code == 0
        header = [l for l in shocks.read_text().splitlines() if not l.startswith("#")][0]
        assert header == "t,e_u,e_v,alpha_1,alpha_2"


class TestEstimate:
    def test_end_to_end_small(self, runner, model_file, data_file, tmp_path):
        spec_file = tmp_path / "spec.json"
        obj = json.loads(model_file.read_text())
        spec_file.write_text(json.dumps({"spec": obj["spec"]}))
        out = tmp_path / "solutions.json"
        res = runner.invoke(
            main,
            ["estimate", str(data_file), str(spec_file), "--rounds", "1",
             "--generations", "8", "--population", "16", "--grid-n", "5",
             "--seed", "1", "--threads", "1", "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        spec, solset, names = serde.read_solutions(out)
        assert len(solset.solutions) >= 1
        assert names == ["u", "v"]
        assert "pen_ll" in res.output

    def test_missing_column_exits_2(self, runner, model_file, tmp_path):
        spec_file = tmp_path / "spec.json"
        obj = json.loads(model_file.read_text())
        spec_file.write_text(json.dumps({"spec": obj["spec"]}))
        short = tmp_path / "short.csv"
        short.write_text("u\n1.0\n2.0\n")  # one column missing
        res = runner.invoke(
            main,
            ["estimate", str(short), str(spec_file), "--rounds", "1", "--out",
             str(tmp_path / "s.json")],
        )
        assert res.exit_code == 2

    def test_degenerate_sample_exits_2(self, runner, model_file, tmp_path):
        spec_file = tmp_path / "spec.json"
        obj = json.loads(model_file.read_text())
        spec_file.write_text(json.dumps({"spec": obj["spec"]}))
        tiny = tmp_path / "tiny.csv"
        tiny.write_text("u,v\n" + "\n".join("0.1,0.2" for _ in range(4)) + "\n")
        res = runner.invoke(
            main,
            ["estimate", str(tiny), str(spec_file), "--rounds", "1", "--out",
             str(tmp_path / "s.json")],
        )
        assert res.exit_code == 2


class TestFilter:
    @pytest.fixture()
    def solutions_file(self, tmp_path, lstvar1_spec, lstvar1_params):
        from stvarkit.estimate import Solution, SolutionSet

        sol = Solution(
            params=lstvar1_params, pen_ll=-10.0, ll=-10.0,
            stability=np.array([0.58, 0.74]), round_id=0, converged=True,
        )
        path = tmp_path / "solutions.json"
        serde.write_solutions(
            path, lstvar1_spec, SolutionSet((sol,), seed=0, rounds=1), names=["u", "v"]
        )
        return path

    def test_identity_filter_keeps_solution(self, runner, solutions_file, tmp_path):
        rfile = tmp_path / "r.json"
        rfile.write_text(json.dumps({"restrictions": []}))
        out = tmp_path / "filtered.json"
        res = runner.invoke(main, ["filter", str(solutions_file), str(rfile), "--out", str(out)])
        assert res.exit_code == 0, res.output
        assert len(json.loads(out.read_text())["solutions"]) == 1

    def test_unsatisfiable_exits_3(self, runner, solutions_file, tmp_path):
        # B entries of both fixtures regime 0 column 0 are (0.6, -0.3):
        # demanding opposite strict dominance in every regime cannot hold
        rfile = tmp_path / "r.json"
        rfile.write_text(
            json.dumps(
                {
                    "restrictions": [
                        {"type": "dominance", "regime": "all", "entries": [0, 0, 1]},
                        {"type": "dominance", "regime": "all", "entries": [0, 1, 0]},
                    ]
                }
            )
        )
        res = runner.invoke(
            main,
            ["filter", str(solutions_file), str(rfile), "--out", str(tmp_path / "f.json")],
        )
        assert res.exit_code == 3
        assert "failures" in res.output


class TestGirfCommand:
    def test_writes_paths_and_summary(self, runner, model_file, data_file, tmp_path):
        prefix = tmp_path / "girf"
        res = runner.invoke(
            main,
            ["girf", str(model_file), str(data_file), "--shock", "0", "--horizon", "4",
             "--draws", "40", "--regime", "1", "--weight-threshold", "0.8",
             "--scale-var", "0", "--scale-size", "1.0", "--accumulate", "1",
             "--seed", "5", "--threads", "1", "--out", str(prefix)],
        )
        assert res.exit_code == 0, res.output
        body = (tmp_path / "girf.csv").read_text()
        assert "history_id,h,target,value" in body
        assert "alpha_1" in body
        summary = (tmp_path / "girf_summary.csv").read_text()
        assert "q05" in summary and "q95" in summary

    def test_impossible_threshold_exits_3(self, runner, model_file, data_file, tmp_path):
        res = runner.invoke(
            main,
            ["girf", str(model_file), str(data_file), "--shock", "0",
             "--weight-threshold", "1.0", "--threads", "1",
             "--out", str(tmp_path / "g")],
        )
        assert res.exit_code == 3


class TestStabilityCommand:
    def test_report_fields(self, runner, model_file):
        res = runner.invoke(main, ["stability", str(model_file)])
        assert res.exit_code == 0, res.output
        obj = json.loads(res.output)
        assert obj["verdict"] == "verified"
        assert obj["jsr"]["upper"] < 1.0
        assert len(obj["per_regime_moduli"]) == 2
        assert len(obj["b1b2_eigenvalues"]) == 2


class TestDiagnoseCommand:
    def test_writes_bundle(self, runner, model_file, data_file, tmp_path):
        prefix = tmp_path / "diag"
        res = runner.invoke(
            main, ["diagnose", str(model_file), str(data_file), "--lags", "6",
                   "--out", str(prefix)]
        )
        assert res.exit_code == 0, res.output
        for suffix in ("_corr_resid.csv", "_corr_sqstd.csv", "_qq_u.csv", "_qq_v.csv"):
            assert (tmp_path / f"diag{suffix}").exists()
        text = (tmp_path / "diag_corr_resid.csv").read_text()
        assert "lag,var_i,var_j,corr" in text


class TestGirfSvg:
    def test_shotgun_plot_written(self, runner, model_file, data_file, tmp_path):
        prefix = tmp_path / "g"
        res = runner.invoke(
            main,
            ["girf", str(model_file), str(data_file), "--shock", "0", "--horizon", "3",
             "--draws", "20", "--regime", "1", "--weight-threshold", "0.8",
             "--threads", "1", "--svg", "--out", str(prefix)],
        )
        assert res.exit_code == 0, res.output
        svg = (tmp_path / "g.svg").read_text()
        assert svg.startswith("<svg")
        assert svg.count("<polyline") >= 20  # one translucent path per history
        assert "alpha_2" in svg


class TestExogenousEstimate:
    def test_weights_csv_attached(self, runner, tmp_path):
        rng = np.random.default_rng(3)
        T = 220
        a2 = np.clip(rng.beta(2, 2, size=T), 0.02, 0.98)
        table = np.column_stack([1 - a2, a2])
        wfile = tmp_path / "w.csv"
        serde.write_matrix_csv(
            wfile, ["t", "alpha_1", "alpha_2"],
            ([t, repr(float(r[0])), repr(float(r[1]))] for t, r in enumerate(table)),
        )
        from stvarkit.model import ModelSpec, ParamVector, simulate

        spec = ModelSpec(d=2, p=1, M=2, weight_kind="exogenous", exog_table=table)
        params = ParamVector(
            phi=[[0.1, 0.2], [0.4, -0.3]],
            A=[[[[0.5, 0.1], [0.0, 0.4]]], [[[0.2, -0.1], [0.1, 0.3]]]],
            B=[[[0.6, 0.2], [-0.3, 0.4]], [[0.7, 0.3], [0.1, 0.8]]],
            weight_params=[], nu=[4.0, 8.0], lam=[-0.2, 0.1],
        )
        sim = simulate(spec, params, T=T, presample=np.zeros((1, 2)), seed=5)
        data_file = tmp_path / "data.csv"
        # prepend the presample row so the CSV carries p + T - 1 usable periods
        serde.write_dataset_csv(
            data_file, np.vstack([sim.data.presample, sim.data.body[:-1]]), ["u", "v"]
        )
        spec_file = tmp_path / "spec.json"
        spec_file.write_text(json.dumps({"spec": {"d": 2, "p": 1, "M": 2, "weight_kind": "exogenous"}}))
        out = tmp_path / "sols.json"
        res = runner.invoke(
            main,
            ["estimate", str(data_file), str(spec_file), "--rounds", "1",
             "--generations", "6", "--population", "16", "--seed", "2",
             "--threads", "1", "--exog-weights", str(wfile), "--out", str(out)],
        )
        assert res.exit_code == 0, res.output
        spec_back, solset, _ = serde.read_solutions(out)
        assert spec_back.weight_kind == "exogenous"
        assert solset.solutions[0].params.weight_params.size == 0
