"""Generalized impulse responses by paired Monte Carlo simulation.

For a history and a shock size, two branches are simulated from the same
lag vector: branch A fixes shock component i at impact (the remaining
impact components are drawn fresh), branch B draws everything. Both
branches share the innovations at horizons 1..H, so the path difference
isolates the impact-period intervention with low Monte Carlo variance.
At horizon 0 the response is available in closed form (the conditional
mean and impact matrix are known given the history), so it carries no
Monte Carlo noise at all.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptySelectionError, NumericError, ParameterError
from .model import (
    Dataset,
    ModelSpec,
    ParamVector,
    batched_det,
    coefficient_stack,
    lag_histories,
    residuals,
    weight_spec,
)
from .linalg import SINGULARITY_RTOL
from .skewt import quantile as skewt_quantile
from .weights import eval_weights_path

SUMMARY_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)
MAX_REDRAW_ROUNDS = 50
SCALE_IMPACT_FLOOR = 1e-12


@dataclass(frozen=True)
class GirfRequest:
    """What to compute: shock, horizon, draws, histories and presentation.

    Histories come either from a regime filter (all data points where
    ``regime``'s weight exceeds ``weight_threshold``, paired with the shock
    recovered there) or as explicit lag vectors with explicit shock sizes.
    ``scale_var``/``scale_size`` rescale every path so the impact response
    of one variable is fixed; ``accumulate`` cumulative-sums the listed
    variables after scaling.
    """

    shock_index: int
    horizon: int = 36
    draws: int = 1000
    regime: int | None = None
    weight_threshold: float = 0.75
    histories: np.ndarray | None = None
    deltas: np.ndarray | None = None
    scale_var: int | None = None
    scale_size: float | None = None
    accumulate: tuple = ()
    include_weights: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        if self.draws < 1:
            raise ConfigError("need at least one draw per history")
        if not 0.0 <= self.weight_threshold <= 1.0:
            raise ConfigError("weight threshold must be in [0, 1]")
        if (self.scale_var is None) != (self.scale_size is None):
            raise ConfigError("scaling needs both a target variable and a size")


@dataclass(frozen=True)
class GirfResult:
    """Per-history response paths and pointwise summary quantiles.

    ``paths`` has shape (K, H+1, d [+ M]); column block order is the
    variables followed, when requested, by the transition weights.
    """

    paths: np.ndarray
    quantiles: np.ndarray  # (len(SUMMARY_QUANTILES), H+1, d [+ M])
    quantile_levels: tuple
    deltas: np.ndarray
    history_ids: tuple
    rejections: int
    dropped: tuple  # history ids whose raw impact was too small to scale


def select_histories(
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset,
    regime: int,
    threshold: float,
    shock_index: int,
):
    """Lag vectors where a regime dominates, with the recovered shock sizes."""
    if not 0 <= regime < spec.M:
        raise ConfigError(f"regime {regime} out of range")
    res = residuals(spec, params, data)
    mask = res.weights[:, regime] > threshold
    if not np.any(mask):
        raise EmptySelectionError(
            f"no period has regime-{regime} weight above {threshold}"
        )
    lags = lag_histories(data, spec.p)
    return lags[mask], res.e[mask, shock_index], np.flatnonzero(mask)


def _draw_matrix(params: ParamVector, rng: np.random.Generator, n: int) -> np.ndarray:
    d = len(params.nu)
    u = rng.random((n, d))
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
    out = np.empty((n, d))
    for i, sp in enumerate(params.shock_params()):
        out[:, i] = skewt_quantile(u[:, i], sp)
    return out


def _batch_weights(spec: ModelSpec, wspec, hist: np.ndarray) -> np.ndarray:
    z = hist[:, spec.switch_lag, spec.switch_var]
    return eval_weights_path(wspec, z, 0, hist.shape[0])


def _batch_step(spec, params, theta, wspec, hist, shocks):
    """One simulation step for a batch of paths; returns (y, alpha, ok mask)."""
    N = hist.shape[0]
    alpha = _batch_weights(spec, wspec, hist)
    X = np.column_stack([np.ones(N), hist.reshape(N, -1)])
    mu = alpha[:, 0:1] * (X @ theta[0])
    for m in range(1, spec.M):
        mu += alpha[:, m : m + 1] * (X @ theta[m])
    Bt = np.tensordot(alpha, params.B, axes=(1, 0))
    dets = batched_det(Bt)
    scale = np.prod(np.sqrt((Bt**2).sum(axis=2)), axis=1)
    ok = np.abs(dets) > SINGULARITY_RTOL * np.maximum(scale, 1e-300)
    if Bt.shape[1] == 2:
        y0 = mu[:, 0] + Bt[:, 0, 0] * shocks[:, 0] + Bt[:, 0, 1] * shocks[:, 1]
        y1 = mu[:, 1] + Bt[:, 1, 0] * shocks[:, 0] + Bt[:, 1, 1] * shocks[:, 1]
        y = np.column_stack([y0, y1])
    else:
        y = mu + np.einsum("nij,nj->ni", Bt, shocks)
    return y, alpha, ok


def _roll(hist: np.ndarray, y: np.ndarray) -> np.ndarray:
    if hist.shape[1] == 1:
        return y[:, None, :]
    return np.concatenate([y[:, None, :], hist[:, :-1, :]], axis=1)


def girf_one(
    spec: ModelSpec,
    params: ParamVector,
    history: np.ndarray,
    delta: float,
    shock_index: int,
    horizon: int,
    draws: int,
    seed=0,
    include_weights: bool = True,
):
    """Monte Carlo response path for one history.

    Returns (mean, std, rejections) where mean and std have shape
    (H+1, d [+ M]); std is the across-draw standard deviation of the
    paired differences (zero at the impact row, which is exact).
    """
    if spec.weight_kind == "exogenous":
        raise ConfigError("impulse responses need an endogenous weight rule")
    params.validate(spec)
    history = np.asarray(history, dtype=float)
    d, p, M = spec.d, spec.p, spec.M
    if history.shape != (p, d):
        raise ConfigError(f"history has shape {history.shape}, expected {(p, d)}")
    wspec = weight_spec(spec, params)
    theta = coefficient_stack(params)
    rng = np.random.default_rng(seed)
    H, N = horizon, draws
    width = d + (M if include_weights else 0)

    # exact impact response: both branches share mu and B at time t
    alpha0 = _batch_weights(spec, wspec, history[None, :, :])[0]
    B0 = np.tensordot(alpha0, params.B, axes=(0, 0))
    impact = B0[:, shock_index] * delta

    diffs = np.empty((N, H + 1, width))
    pending = np.arange(N)
    rejections = 0
    for _ in range(MAX_REDRAW_ROUNDS):
        if pending.size == 0:
            break
        n = pending.size
        eA = _draw_matrix(params, rng, n)
        eA[:, shock_index] = delta
        eB = _draw_matrix(params, rng, n)
        future = _draw_matrix(params, rng, n * H).reshape(H, n, d) if H else None

        histA = np.broadcast_to(history, (n, p, d)).copy()
        histB = histA.copy()
        ok = np.ones(n, dtype=bool)
        block = np.empty((n, H + 1, width))
        for h in range(H + 1):
            if h == 0:
                sA, sB = eA, eB
            else:
                sA = sB = future[h - 1]
            yA, aA, okA = _batch_step(spec, params, theta, wspec, histA, sA)
            yB, aB, okB = _batch_step(spec, params, theta, wspec, histB, sB)
            ok &= okA & okB
            block[:, h, :d] = yA - yB
            if include_weights:
                block[:, h, d:] = aA - aB
            histA = _roll(histA, yA)
            histB = _roll(histB, yB)
        good = pending[ok]
        diffs[good] = block[ok]
        rejections += int((~ok).sum())
        pending = pending[~ok]
    if pending.size:
        raise NumericError(
            f"{pending.size} draws kept hitting singular impact matrices"
        )

    mean = diffs.mean(axis=0)
    std = diffs.std(axis=0, ddof=1) if N > 1 else np.zeros_like(mean)
    mean[0, :d] = impact
    if include_weights:
        mean[0, d:] = 0.0
    std[0] = 0.0
    return mean, std, rejections


def scale_paths(paths: np.ndarray, scale_var: int, scale_size: float):
    """Rescale each path so its impact response of scale_var equals scale_size.

    Sign-preserving multiplication by size / raw impact; paths whose raw
    impact is below the floor are reported as dropped. Applying the same
    scaling twice is a no-op.
    """
    raw = paths[:, 0, scale_var]
    keep = np.abs(raw) > SCALE_IMPACT_FLOOR
    factors = scale_size / np.where(keep, raw, 1.0)
    return paths[keep] * factors[keep, None, None], keep


def _one_history_job(args):
    spec, params, hist, delta, req, k = args
    sub = int(np.random.SeedSequence([req.seed, k]).generate_state(1)[0])
    mean, _, rej = girf_one(
        spec, params, hist, float(delta), req.shock_index,
        req.horizon, req.draws, seed=sub, include_weights=req.include_weights,
    )
    return mean, rej


def girf_run(
    request: GirfRequest,
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset | None = None,
    threads: int = 1,
) -> GirfResult:
    """Responses over all requested histories with scaling and summaries."""
    if not 0 <= request.shock_index < spec.d:
        raise ConfigError(f"shock index {request.shock_index} out of range")
    if request.histories is not None:
        hists = np.asarray(request.histories, dtype=float)
        if request.deltas is None:
            deltas = np.ones(hists.shape[0])
        else:
            deltas = np.broadcast_to(
                np.asarray(request.deltas, dtype=float), (hists.shape[0],)
            ).copy()
        ids = tuple(range(hists.shape[0]))
    else:
        if request.regime is None or data is None:
            raise ConfigError("need either explicit histories or a regime filter with data")
        hists, deltas, t_idx = select_histories(
            spec, params, data, request.regime, request.weight_threshold,
            request.shock_index,
        )
        ids = tuple(int(t) for t in t_idx)

    jobs = [
        (spec, params, hists[k], deltas[k], request, k) for k in range(hists.shape[0])
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(_one_history_job, jobs))
    else:
        outs = [_one_history_job(j) for j in jobs]
    paths = np.array([o[0] for o in outs])
    rejections = sum(o[1] for o in outs)

    dropped = ()
    if request.scale_var is not None:
        paths, keep = scale_paths(paths, request.scale_var, request.scale_size)
        dropped = tuple(i for i, k in zip(ids, keep) if not k)
        ids = tuple(i for i, k in zip(ids, keep) if k)
        deltas = deltas[keep]
        if paths.shape[0] == 0:
            raise EmptySelectionError("every history was dropped by impact scaling")
    for v in request.accumulate:
        if not 0 <= v < spec.d:
            raise ConfigError(f"accumulate index {v} out of range")
        paths[:, :, v] = np.cumsum(paths[:, :, v], axis=1)

    quants = np.quantile(paths, SUMMARY_QUANTILES, axis=0)
    return GirfResult(
        paths=paths,
        quantiles=quants,
        quantile_levels=SUMMARY_QUANTILES,
        deltas=np.asarray(deltas),
        history_ids=ids,
        rejections=rejections,
        dropped=dropped,
    )
