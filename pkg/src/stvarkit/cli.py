"""Command-line interface.

Exit codes: 0 success, 2 input/configuration error, 3 an empty-result
condition (no surviving solution, no matching history), 4 numerical
failure. Every artifact embeds the tool version, the master seed and the
SHA-256 of each input file, so reruns with identical inputs are
byte-identical.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import diagnostics, girf, serde, skewt
from .errors import (
    ConfigError,
    DomainError,
    EmptySelectionError,
    NumericError,
    ParameterError,
    ShapeError,
    StvarError,
)
from .estimate import (
    GaConfig,
    NlsConfig,
    SolutionSet,
    filter_solutions,
    run_three_step,
)
from .likelihood import PenaltyConfig
from .model import simulate as model_simulate
from .stationarity import ergodic_report
from .serde import TOOL_VERSION

_INPUT_ERRORS = (ConfigError, ParameterError, ShapeError, DomainError)
_EMPTY_ERRORS = (EmptySelectionError,)


def _fail(exc: BaseException) -> "NoReturn":
    click.echo(f"error: {exc}", err=True)
    if isinstance(exc, _INPUT_ERRORS):
        sys.exit(2)
    if isinstance(exc, _EMPTY_ERRORS):
        sys.exit(3)
    sys.exit(4)


def _default_threads() -> int:
    env = os.environ.get("STVARKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"STVARKIT_THREADS={env!r} is not an integer")
    return os.cpu_count() or 1


@click.group()
@click.version_option(TOOL_VERSION)
def main():
    """Structural smooth-transition VAR toolkit."""


@main.command()
@click.argument("model_file", type=click.Path(exists=True))
@click.option("--T", "T", type=int, default=250, show_default=True, help="periods to simulate")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--burnin", type=int, default=1000, show_default=True)
@click.option("--out", type=click.Path(), required=True, help="dataset CSV path")
@click.option("--shocks-out", type=click.Path(), default=None, help="shock/weight record CSV")
def simulate(model_file, T, seed, burnin, out, shocks_out):
    """Simulate a dataset from a model file."""
    try:
        spec, params, names = serde.read_model(model_file)
        names = names or [f"y{i + 1}" for i in range(spec.d)]
        hashes = {Path(model_file).name: serde.content_hash(model_file)}
        pre = serde.provenance_lines(seed=seed, input_hashes=hashes)
        if T == 0:
            serde.write_dataset_csv(out, np.empty((0, spec.d)), names, pre)
            if shocks_out:
                cols = [f"e_{n}" for n in names] + [f"alpha_{m + 1}" for m in range(spec.M)]
                serde.write_matrix_csv(shocks_out, ["t"] + cols, [], pre)
            return
        sim = model_simulate(spec, params, T=T, burnin=burnin, seed=seed)
        serde.write_dataset_csv(out, sim.data.body, names, pre)
        if shocks_out:
            cols = [f"e_{n}" for n in names] + [f"alpha_{m + 1}" for m in range(spec.M)]
            rows = [
                [t] + [repr(float(v)) for v in sim.shocks[t]] + [repr(float(v)) for v in sim.weights[t]]
                for t in range(T)
            ]
            serde.write_matrix_csv(shocks_out, ["t"] + cols, rows, pre)
    except StvarError as exc:
        _fail(exc)
    click.echo(f"wrote {T} periods to {out}")


@main.command()
@click.argument("data_csv", type=click.Path(exists=True))
@click.argument("spec_json", type=click.Path(exists=True))
@click.option("--rounds", type=int, default=24, show_default=True)
@click.option("--eta", type=float, default=0.05, show_default=True)
@click.option("--kappa", type=float, default=0.2, show_default=True)
@click.option("--grid-n", type=int, default=11, show_default=True)
@click.option("--population", type=int, default=64, show_default=True)
@click.option("--generations", type=int, default=200, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None, help="worker processes (default: all cores)")
@click.option("--top", type=int, default=5, show_default=True, help="rows in the printed table")
@click.option("--exog-weights", type=click.Path(exists=True), default=None,
              help="CSV of exogenous weights (t, alpha_1, ..., alpha_M)")
@click.option("--out", type=click.Path(), required=True, help="solutions JSON path")
def estimate(data_csv, spec_json, rounds, eta, kappa, grid_n, population, generations,
             seed, threads, top, exog_weights, out):
    """Run the three-step estimation and write the ranked solution set."""
    try:
        obj = json.loads(Path(spec_json).read_text())
        spec_dict = obj["spec"] if "spec" in obj else obj
        if exog_weights is not None:
            spec_dict = dict(spec_dict)
            spec_dict["exog_table"] = serde.read_weights_csv(exog_weights).tolist()
        spec = serde.spec_from_dict(spec_dict)
        data = serde.read_dataset_csv(data_csv, spec.p)
        threads = threads if threads is not None else _default_threads()
        solset = run_three_step(
            spec,
            data,
            rounds=rounds,
            nls_cfg=NlsConfig(grid_points=grid_n),
            ga_cfg=GaConfig(population=population, generations=generations),
            pen_cfg=PenaltyConfig(eta=eta, kappa=kappa),
            seed=seed,
            threads=threads,
        )
        hashes = {
            Path(data_csv).name: serde.content_hash(data_csv),
            Path(spec_json).name: serde.content_hash(spec_json),
        }
        if exog_weights is not None:
            hashes[Path(exog_weights).name] = serde.content_hash(exog_weights)
        serde.write_solutions(out, spec, solset, names=data.names, input_hashes=hashes)
    except (json.JSONDecodeError, KeyError) as exc:
        _fail(ConfigError(f"bad spec file {spec_json}: {exc}"))
    except StvarError as exc:
        _fail(exc)
    click.echo(f"{'rank':>4} {'pen_ll':>14} {'ll':>14} {'max modulus':>12} {'conv':>5} {'round':>5}")
    for rank, sol in enumerate(solset.solutions[:top]):
        click.echo(
            f"{rank:>4} {sol.pen_ll:>14.4f} {sol.ll:>14.4f} "
            f"{float(np.max(sol.stability)):>12.4f} {str(sol.converged):>5} {sol.round_id:>5}"
        )
    click.echo(f"wrote {len(solset.solutions)} solutions to {out}")


@main.command("filter")
@click.argument("solutions_json", type=click.Path(exists=True))
@click.argument("restrictions_json", type=click.Path(exists=True))
@click.option("--window", type=float, default=5.0, show_default=True,
              help="keep solutions within this many log-points of the best")
@click.option("--out", type=click.Path(), required=True)
def filter_cmd(solutions_json, restrictions_json, window, out):
    """Filter solutions by overidentifying restrictions; report labelings."""
    try:
        spec, solset, names = serde.read_solutions(solutions_json)
        rset = serde.read_restrictions(restrictions_json)
        result = filter_solutions(solset, rset, ll_window=window)
        if not result.solutions:
            click.echo("no solution satisfies every restriction", err=True)
            for r, n in result.failure_counts.items():
                click.echo(f"  {n:>4} failures: {r}", err=True)
            sys.exit(3)
        hashes = {
            Path(solutions_json).name: serde.content_hash(solutions_json),
            Path(restrictions_json).name: serde.content_hash(restrictions_json),
        }
        filtered = SolutionSet(
            solutions=result.solutions, seed=solset.seed, rounds=solset.rounds
        )
        obj = {
            "schema": serde.SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "seed": solset.seed,
            "rounds": solset.rounds,
            "input_hashes": hashes,
            "spec": serde.spec_to_dict(spec),
            "solutions": [serde.solution_to_dict(s) for s in result.solutions],
            "labelings": [
                {"perm": list(l.perm), "signs": list(l.signs)} for l in result.labelings
            ],
        }
        if names:
            obj["names"] = list(names)
        Path(out).write_text(serde.dumps(obj))
    except StvarError as exc:
        _fail(exc)
    for sol, lab in zip(result.solutions, result.labelings):
        click.echo(
            f"pen_ll {sol.pen_ll:.4f}: columns {list(lab.perm)} signs {list(lab.signs)}"
        )
    click.echo(f"wrote {len(result.solutions)} surviving solutions to {out}")


@main.command("girf")
@click.argument("fitted_json", type=click.Path(exists=True))
@click.argument("data_csv", type=click.Path(exists=True))
@click.option("--shock", type=int, required=True, help="shock index (0-based)")
@click.option("--horizon", type=int, default=36, show_default=True)
@click.option("--draws", type=int, default=1000, show_default=True)
@click.option("--regime", type=int, default=0, show_default=True)
@click.option("--weight-threshold", type=float, default=0.75, show_default=True)
@click.option("--scale-var", type=int, default=None)
@click.option("--scale-size", type=float, default=None)
@click.option("--accumulate", type=str, default="", help="comma-separated variable indices")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--threads", type=int, default=None)
@click.option("--svg", is_flag=True, help="also write a <prefix>.svg shotgun plot")
@click.option("--out", "out_prefix", type=click.Path(), required=True,
              help="output prefix for <prefix>.csv and <prefix>_summary.csv")
def girf_cmd(fitted_json, data_csv, shock, horizon, draws, regime, weight_threshold,
             scale_var, scale_size, accumulate, seed, threads, svg, out_prefix):
    """Monte Carlo impulse responses conditional on a dominant regime."""
    try:
        spec, params, names = serde.read_model(fitted_json)
        names = names or [f"y{i + 1}" for i in range(spec.d)]
        data = serde.read_dataset_csv(data_csv, spec.p)
        acc = tuple(int(v) for v in accumulate.split(",") if v.strip() != "")
        req = girf.GirfRequest(
            shock_index=shock,
            horizon=horizon,
            draws=draws,
            regime=regime,
            weight_threshold=weight_threshold,
            scale_var=scale_var,
            scale_size=scale_size,
            accumulate=acc,
            seed=seed,
        )
        threads = threads if threads is not None else _default_threads()
        result = girf.girf_run(req, spec, params, data, threads=threads)
        hashes = {
            Path(fitted_json).name: serde.content_hash(fitted_json),
            Path(data_csv).name: serde.content_hash(data_csv),
        }
        pre = serde.provenance_lines(seed=seed, input_hashes=hashes)
        serde.write_girf_csv(out_prefix, result, names, include_weights=True, preamble=pre)
        if svg:
            from .plots import shotgun_svg

            shotgun_svg(f"{out_prefix}.svg", result, names)
    except ValueError as exc:
        _fail(ConfigError(str(exc)))
    except StvarError as exc:
        _fail(exc)
    click.echo(
        f"{result.paths.shape[0]} histories, {result.rejections} redraws, "
        f"{len(result.dropped)} dropped; wrote {out_prefix}.csv"
    )


@main.command()
@click.argument("fitted_json", type=click.Path(exists=True))
@click.option("--jsr-tol", type=float, default=5e-3, show_default=True)
@click.option("--jsr-budget", type=int, default=2_000_000, show_default=True)
@click.option("--jsr-depth", type=int, default=20, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="write the JSON report here")
def stability(fitted_json, jsr_tol, jsr_budget, jsr_depth, out):
    """Stationarity report: per-regime moduli, JSR bracket, verdict."""
    try:
        spec, params, _ = serde.read_model(fitted_json)
        rep = ergodic_report(params, spec, tol=jsr_tol, budget=jsr_budget, max_depth=jsr_depth)
        obj = {
            "schema": serde.SCHEMA_VERSION,
            "tool_version": TOOL_VERSION,
            "input_hashes": {Path(fitted_json).name: serde.content_hash(fitted_json)},
            "per_regime_moduli": rep.moduli.tolist(),
            "jsr": serde._jsr_to_dict(rep.jsr),
            "b1b2_eigenvalues": None
            if rep.impact_pair is None
            else [[v.real, v.imag] for v in rep.impact_pair.eigenvalues],
            "verdict": rep.verdict,
        }
        text = serde.dumps(obj)
        if out:
            Path(out).write_text(text)
        click.echo(text, nl=False)
    except StvarError as exc:
        _fail(exc)


@main.command()
@click.argument("fitted_json", type=click.Path(exists=True))
@click.argument("data_csv", type=click.Path(exists=True))
@click.option("--lags", type=int, default=24, show_default=True)
@click.option("--out", "out_prefix", type=click.Path(), required=True)
def diagnose(fitted_json, data_csv, lags, out_prefix):
    """Residual correlograms and QQ data against the fitted shock marginals."""
    try:
        spec, params, names = serde.read_model(fitted_json)
        names = names or [f"y{i + 1}" for i in range(spec.d)]
        data = serde.read_dataset_csv(data_csv, spec.p)
        hashes = {
            Path(fitted_json).name: serde.content_hash(fitted_json),
            Path(data_csv).name: serde.content_hash(data_csv),
        }
        pre = serde.provenance_lines(input_hashes=hashes)
        from .model import residuals as model_residuals

        res = model_residuals(spec, params, data)
        for label, series in (("resid", res.u), ("sqstd", res.e**2)):
            rep = diagnostics.acf_ccf(series, lags)
            rows = []
            for k in range(lags + 1):
                for i in range(spec.d):
                    for j in range(spec.d):
                        rows.append([k, names[i], names[j], repr(float(rep.corr[k, i, j]))])
            serde.write_matrix_csv(
                f"{out_prefix}_corr_{label}.csv",
                ["lag", "var_i", "var_j", "corr"],
                rows,
                pre + [f"# band: {repr(rep.band)}"],
            )
        for i, name in enumerate(names):
            theo, emp = diagnostics.qq_data(
                res.e[:, i], skewt.SkewTParams(params.nu[i], params.lam[i])
            )
            rows = [
                [k + 1, repr(float(theo[k])), repr(float(emp[k]))] for k in range(len(theo))
            ]
            serde.write_matrix_csv(
                f"{out_prefix}_qq_{name}.csv", ["k", "theoretical", "empirical"], rows, pre
            )
    except StvarError as exc:
        _fail(exc)
    click.echo(f"wrote diagnostics CSVs with prefix {out_prefix}")


if __name__ == "__main__":
    main()
