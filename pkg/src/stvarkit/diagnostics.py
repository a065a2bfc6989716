"""Residual adequacy checks: correlograms and quantile-quantile data.

Correlations use the conventional global-mean, biased-denominator (1/T)
normalization so lag-0 autocorrelations are exactly one and the +-1.96/sqrt(T)
bands apply.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import skewt
from .errors import ShapeError
from .model import Dataset, ModelSpec, ParamVector, residuals


@dataclass(frozen=True)
class CorrReport:
    """Auto/cross correlations: corr[k, i, j] relates x_{i,t} to x_{j,t-k}."""

    lags: np.ndarray  # 0..L
    corr: np.ndarray  # (L+1, d, d)
    band: float  # 1.96 / sqrt(T)
    flagged: np.ndarray  # (d,) True where the series was constant


def acf_ccf(series, max_lag: int) -> CorrReport:
    """Sample auto- and cross-correlation functions for lags 0..max_lag."""
    x = np.asarray(series, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    T, d = x.shape
    if T <= max_lag:
        raise ShapeError(f"need more than {max_lag} observations, got {T}")
    centered = x - x.mean(axis=0)
    var = (centered**2).mean(axis=0)
    flagged = var == 0.0
    denom = np.sqrt(np.outer(var, var))
    denom[denom == 0.0] = np.nan
    corr = np.empty((max_lag + 1, d, d))
    for k in range(max_lag + 1):
        if k == 0:
            cov = centered.T @ centered / T
        else:
            cov = centered[k:].T @ centered[:-k] / T
        corr[k] = cov / denom
    return CorrReport(
        lags=np.arange(max_lag + 1), corr=corr, band=1.96 / np.sqrt(T), flagged=flagged
    )


def standardized_residuals(spec: ModelSpec, params: ParamVector, data: Dataset) -> np.ndarray:
    """Structural shocks recovered from the data under the fitted model."""
    return residuals(spec, params, data).e


def qq_data(shocks, p: skewt.SkewTParams):
    """(theoretical, empirical) quantile pairs at plotting positions (k-0.5)/T."""
    x = np.sort(np.asarray(shocks, dtype=float))
    T = x.shape[0]
    if T < 10:
        raise ShapeError(f"need at least 10 observations, got {T}")
    probs = (np.arange(1, T + 1) - 0.5) / T
    theo = np.asarray(skewt.quantile(probs, p))
    return theo, x
