import json

import numpy as np
import pytest

from stvarkit import serde
from stvarkit.errors import ConfigError
from stvarkit.estimate import (
    DominanceRestriction,
    RestrictionSet,
    SignRestriction,
    Solution,
    SolutionSet,
)


class TestModelRoundtrip:
    def test_roundtrip(self, tmp_path, lstvar1_spec, lstvar1_params):
        path = tmp_path / "model.json"
        serde.write_model(path, lstvar1_spec, lstvar1_params, names=["cpu", "epu"])
        spec, params, names = serde.read_model(path)
        assert spec == lstvar1_spec
        assert names == ["cpu", "epu"]
        for field in ("phi", "A", "B", "weight_params", "nu", "lam"):
            assert np.array_equal(getattr(params, field), getattr(lstvar1_params, field))

    def test_bad_json_is_config_error(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            serde.read_model(path)

    def test_missing_fields_is_config_error(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"schema": 1, "spec": {"d": 2}}))
        with pytest.raises(ConfigError):
            serde.read_model(path)

    def test_deterministic_bytes(self, tmp_path, lstvar1_spec, lstvar1_params):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        serde.write_model(p1, lstvar1_spec, lstvar1_params)
        serde.write_model(p2, lstvar1_spec, lstvar1_params)
        assert p1.read_bytes() == p2.read_bytes()


class TestSolutionsRoundtrip:
    def test_roundtrip(self, tmp_path, lstvar1_spec, lstvar1_params):
        sol = Solution(
            params=lstvar1_params, pen_ll=-12.5, ll=-12.0,
            stability=np.array([0.58, 0.74]), round_id=3, converged=True, normalized=True,
        )
        solset = SolutionSet(solutions=(sol,), seed=99, rounds=8)
        path = tmp_path / "solutions.json"
        serde.write_solutions(path, lstvar1_spec, solset, names=["a", "b"])
        spec, back, names = serde.read_solutions(path)
        assert spec == lstvar1_spec
        assert back.seed == 99 and back.rounds == 8
        assert back.solutions[0].pen_ll == -12.5
        assert np.array_equal(back.solutions[0].params.B, lstvar1_params.B)

    def test_read_model_accepts_solutions_file(self, tmp_path, lstvar1_spec, lstvar1_params):
        sol = Solution(
            params=lstvar1_params, pen_ll=-1.0, ll=-1.0,
            stability=np.array([0.5, 0.5]), round_id=0, converged=True,
        )
        path = tmp_path / "solutions.json"
        serde.write_solutions(path, lstvar1_spec, SolutionSet((sol,), 1, 1), names=["a", "b"])
        spec, params, names = serde.read_model(path)
        assert np.array_equal(params.B, lstvar1_params.B)


class TestRestrictions:
    def test_roundtrip(self, tmp_path):
        rset = RestrictionSet(
            (
                SignRestriction(var=0, shock=1, sign=-1, regime=None),
                DominanceRestriction(var=1, shock=0, other=1, regime=1),
            )
        )
        path = tmp_path / "r.json"
        path.write_text(serde.dumps(serde.restrictions_to_dict(rset)))
        back = serde.read_restrictions(path)
        assert back == rset

    def test_unknown_type_rejected(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text(json.dumps({"restrictions": [{"type": "narrative", "entries": [0, 0]}]}))
        with pytest.raises(ConfigError):
            serde.read_restrictions(path)


class TestCsv:
    def test_dataset_roundtrip_with_comments(self, tmp_path):
        body = np.array([[1.5, -0.25], [0.125, 3.0], [2.0, 1.0]])
        path = tmp_path / "d.csv"
        serde.write_dataset_csv(path, body, ["a", "b"], preamble=serde.provenance_lines(seed=7))
        data = serde.read_dataset_csv(path, p=1)
        assert np.array_equal(data.presample, body[:1])
        assert np.array_equal(data.body, body[1:])
        assert data.names == ("a", "b")
        assert path.read_text().startswith("# stvarkit_version")

    def test_too_few_rows_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        serde.write_dataset_csv(path, np.zeros((1, 2)), ["a", "b"])
        with pytest.raises(ConfigError):
            serde.read_dataset_csv(path, p=1)

    def test_weights_csv(self, tmp_path):
        path = tmp_path / "w.csv"
        serde.write_matrix_csv(
            path, ["t", "alpha_1", "alpha_2"], [[0, "0.25", "0.75"], [1, "1.0", "0.0"]]
        )
        table = serde.read_weights_csv(path)
        assert np.array_equal(table, [[0.25, 0.75], [1.0, 0.0]])

    def test_weights_csv_needs_t_column(self, tmp_path):
        path = tmp_path / "w.csv"
        serde.write_matrix_csv(path, ["alpha_1", "alpha_2"], [["0.5", "0.5"]])
        with pytest.raises(ConfigError):
            serde.read_weights_csv(path)
