"""File formats: model/solution/restriction JSON and tabular CSV.

Everything is emitted deterministically (sorted keys, shortest-roundtrip
floats) so identical inputs and seeds reproduce identical bytes. See
docs/formats.md for the schemas.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .estimate import (
    CrossSignRestriction,
    DominanceRestriction,
    RestrictionSet,
    SignRestriction,
    Solution,
    SolutionSet,
)
from .model import Dataset, ModelSpec, ParamVector
from .stationarity import JsrBound

SCHEMA_VERSION = 1
TOOL_VERSION = "0.1.0"


def content_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# model spec + params


def spec_to_dict(spec: ModelSpec) -> dict:
    out = {
        "d": spec.d,
        "p": spec.p,
        "M": spec.M,
        "weight_kind": spec.weight_kind,
    }
    if spec.weight_kind == "exogenous":
        out["exog_table"] = np.asarray(spec.exog_table).tolist()
    else:
        out["switch_var"] = spec.switch_var
        out["switch_lag"] = spec.switch_lag
    return out


def spec_from_dict(obj: dict) -> ModelSpec:
    try:
        kind = obj["weight_kind"]
        table = np.asarray(obj["exog_table"], dtype=float) if kind == "exogenous" else None
        return ModelSpec(
            d=int(obj["d"]),
            p=int(obj["p"]),
            M=int(obj["M"]),
            weight_kind=kind,
            switch_var=int(obj.get("switch_var", 0)),
            switch_lag=int(obj.get("switch_lag", 0)),
            exog_table=table,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad model spec: {exc}") from exc


def params_to_dict(params: ParamVector) -> dict:
    return {
        "phi": params.phi.tolist(),
        "A": params.A.tolist(),
        "B": params.B.tolist(),
        "weight_params": params.weight_params.tolist(),
        "nu": params.nu.tolist(),
        "lambda": params.lam.tolist(),
    }


def params_from_dict(obj: dict) -> ParamVector:
    try:
        return ParamVector(
            phi=np.asarray(obj["phi"], dtype=float),
            A=np.asarray(obj["A"], dtype=float),
            B=np.asarray(obj["B"], dtype=float),
            weight_params=np.asarray(obj["weight_params"], dtype=float),
            nu=np.asarray(obj["nu"], dtype=float),
            lam=np.asarray(obj["lambda"], dtype=float),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameter vector: {exc}") from exc


def write_model(path, spec: ModelSpec, params: ParamVector, names=None, extra=None) -> None:
    obj = {
        "schema": SCHEMA_VERSION,
        "spec": spec_to_dict(spec),
        "params": params_to_dict(params),
    }
    if names is not None:
        obj["names"] = list(names)
    if extra:
        obj.update(extra)
    Path(path).write_text(dumps(obj))


def read_model(path):
    """Load (spec, params, names) from a model file or a solutions file.

    Solution files carry many fits; the top-ranked one is used unless the
    object provides a different convention downstream.
    """
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    if "solutions" in obj:
        spec = spec_from_dict(obj["spec"])
        sols = obj["solutions"]
        if not sols:
            raise ConfigError(f"{path} contains no solutions")
        params = params_from_dict(sols[0]["params"])
        names = obj.get("names")
        return spec, params, names
    try:
        spec = spec_from_dict(obj["spec"])
        params = params_from_dict(obj["params"])
    except KeyError as exc:
        raise ConfigError(f"model file {path} is missing {exc}") from exc
    params.validate(spec)
    return spec, params, obj.get("names")


# ---------------------------------------------------------------------------
# solutions


def _jsr_to_dict(jsr: JsrBound | None):
    if jsr is None:
        return None
    return {
        "lower": jsr.lower,
        "upper": jsr.upper,
        "tolerance": jsr.tolerance,
        "converged": jsr.converged,
        "products_explored": jsr.products_explored,
        "depth_reached": jsr.depth_reached,
    }


def solution_to_dict(sol: Solution) -> dict:
    return {
        "params": params_to_dict(sol.params),
        "pen_ll": sol.pen_ll,
        "ll": sol.ll,
        "stability": np.asarray(sol.stability).tolist(),
        "round_id": sol.round_id,
        "converged": sol.converged,
        "normalized": sol.normalized,
        "jsr": _jsr_to_dict(sol.jsr),
    }


def solution_from_dict(obj: dict) -> Solution:
    jsr = obj.get("jsr")
    return Solution(
        params=params_from_dict(obj["params"]),
        pen_ll=float(obj["pen_ll"]),
        ll=float(obj["ll"]),
        stability=np.asarray(obj["stability"], dtype=float),
        round_id=int(obj["round_id"]),
        converged=bool(obj["converged"]),
        normalized=bool(obj.get("normalized", False)),
        jsr=JsrBound(**jsr) if jsr else None,
    )


def write_solutions(
    path, spec: ModelSpec, solset: SolutionSet, names=None, input_hashes=None
) -> None:
    obj = {
        "schema": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "seed": solset.seed,
        "rounds": solset.rounds,
        "input_hashes": input_hashes or {},
        "spec": spec_to_dict(spec),
        "solutions": [solution_to_dict(s) for s in solset.solutions],
    }
    if names is not None:
        obj["names"] = list(names)
    Path(path).write_text(dumps(obj))


def read_solutions(path):
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read solutions file {path}: {exc}") from exc
    try:
        spec = spec_from_dict(obj["spec"])
        sols = tuple(solution_from_dict(s) for s in obj["solutions"])
        solset = SolutionSet(
            solutions=sols, seed=int(obj["seed"]), rounds=int(obj["rounds"])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad solutions file {path}: {exc}") from exc
    return spec, solset, obj.get("names")


# ---------------------------------------------------------------------------
# restrictions


def restrictions_from_dict(obj: dict) -> RestrictionSet:
    items = []
    try:
        for entry in obj["restrictions"]:
            kind = entry["type"]
            regime = entry.get("regime", "all")
            regime = None if regime == "all" else int(regime)
            ent = entry["entries"]
            if kind == "sign":
                items.append(
                    SignRestriction(
                        var=int(ent[0]), shock=int(ent[1]),
                        sign=int(entry["sign"]), regime=regime,
                    )
                )
            elif kind == "dominance":
                items.append(
                    DominanceRestriction(
                        var=int(ent[0]), shock=int(ent[1]), other=int(ent[2]),
                        regime=regime,
                    )
                )
            elif kind == "cross_sign":
                items.append(CrossSignRestriction(var=int(ent[0]), shock=int(ent[1])))
            else:
                raise ConfigError(f"unknown restriction type {kind!r}")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"bad restriction entry: {exc}") from exc
    return RestrictionSet(tuple(items))


def read_restrictions(path) -> RestrictionSet:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read restrictions file {path}: {exc}") from exc
    return restrictions_from_dict(obj)


def restrictions_to_dict(rset: RestrictionSet) -> dict:
    out = []
    for r in rset.restrictions:
        if isinstance(r, SignRestriction):
            out.append(
                {
                    "type": "sign",
                    "regime": "all" if r.regime is None else r.regime,
                    "entries": [r.var, r.shock],
                    "sign": r.sign,
                }
            )
        elif isinstance(r, DominanceRestriction):
            out.append(
                {
                    "type": "dominance",
                    "regime": "all" if r.regime is None else r.regime,
                    "entries": [r.var, r.shock, r.other],
                }
            )
        else:
            out.append({"type": "cross_sign", "entries": [r.var, r.shock]})
    return {"schema": SCHEMA_VERSION, "restrictions": out}


# ---------------------------------------------------------------------------
# CSV


def _format_row(values) -> list:
    return [repr(float(v)) for v in values]


def provenance_lines(seed=None, input_hashes=None) -> list:
    """Comment lines embedding version, seed and input hashes into a CSV."""
    out = [f"# stvarkit_version: {TOOL_VERSION}"]
    if seed is not None:
        out.append(f"# seed: {seed}")
    for name, digest in (input_hashes or {}).items():
        out.append(f"# input_sha256 {name}: {digest}")
    return out


def write_matrix_csv(path, header, rows, preamble=()) -> None:
    buf = io.StringIO()
    for line in preamble:
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    Path(path).write_text(buf.getvalue())


def _read_csv_rows(path):
    """(header, float rows) of a CSV, skipping '#' comment lines."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(io.StringIO("".join(lines)))
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader if row]
    return header, rows


def write_dataset_csv(path, body: np.ndarray, names, preamble=()) -> None:
    """Observation rows only; a consumer treats the first p rows as presample."""
    body = np.asarray(body, dtype=float).reshape(-1, len(names))
    write_matrix_csv(path, list(names), (_format_row(r) for r in body), preamble)


def read_dataset_csv(path, p: int) -> Dataset:
    """Split a CSV of observations into p presample rows and the body."""
    try:
        header, rows = _read_csv_rows(path)
    except (OSError, StopIteration, ValueError) as exc:
        raise ConfigError(f"cannot read dataset {path}: {exc}") from exc
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[0] <= p:
        raise ConfigError(
            f"dataset {path} needs more than p={p} rows, got {0 if arr.ndim != 2 else arr.shape[0]}"
        )
    return Dataset(presample=arr[:p], body=arr[p:], names=tuple(header))


def read_weights_csv(path) -> np.ndarray:
    """Exogenous weight table from columns t, alpha_1, ..., alpha_M."""
    try:
        header, rows = _read_csv_rows(path)
    except (OSError, StopIteration, ValueError) as exc:
        raise ConfigError(f"cannot read weights table {path}: {exc}") from exc
    if not header or header[0] != "t" or len(header) < 3:
        raise ConfigError("weights CSV must have columns t, alpha_1, ..., alpha_M")
    return np.asarray(rows, dtype=float)[:, 1:]


def write_girf_csv(prefix, result, names, include_weights: bool, preamble=()) -> None:
    """Long-format paths plus a pointwise quantile summary."""
    d = len(names)
    M = result.paths.shape[2] - d if include_weights else 0
    targets = list(names) + [f"alpha_{m + 1}" for m in range(M)]
    rows = []
    for k, hid in enumerate(result.history_ids):
        for h in range(result.paths.shape[1]):
            for j, tgt in enumerate(targets):
                rows.append([hid, h, tgt, repr(float(result.paths[k, h, j]))])
    write_matrix_csv(f"{prefix}.csv", ["history_id", "h", "target", "value"], rows, preamble)
    qrows = []
    for h in range(result.paths.shape[1]):
        for j, tgt in enumerate(targets):
            qrows.append(
                [h, tgt] + [repr(float(result.quantiles[q, h, j])) for q in range(len(result.quantile_levels))]
            )
    qheader = ["h", "target"] + [f"q{int(q * 100):02d}" for q in result.quantile_levels]
    write_matrix_csv(f"{prefix}_summary.csv", qheader, qrows, preamble)
