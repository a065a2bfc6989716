"""Objective functions: log-likelihood, stability penalty, NLS objectives.

All optimizers work in a "free" coordinate system where every point is
evaluable: impact-matrix entries are unconstrained, degrees of freedom are
2 + exp(s), skewness is tanh(r), and a logistic scale is exp(g). Invalid
or singular points yield a -inf sentinel rather than an exception so that
global searches can roam outside the admissible region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import skewt
from .errors import ParameterError, ShapeError
from .model import (
    Dataset,
    ModelSpec,
    ParamVector,
    batched_solve,
    conditional_path,
    design_matrix,
    lag_histories,
    mean_path,
)
from .stationarity import companion_set

NEG_INF = float("-inf")


@dataclass(frozen=True)
class PenaltyConfig:
    """Stability-penalty tuning: start 1 - eta from the unit circle, slope kappa."""

    eta: float = 0.05
    kappa: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.eta < 1.0:
            raise ParameterError(f"eta must be in (0, 1), got {self.eta}")
        if not self.kappa > 0.0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}")


def excess_moduli_sq(moduli: np.ndarray, eta: float) -> float:
    """sum of squared excesses of eigenvalue moduli over 1 - eta."""
    return float(np.sum(np.maximum(0.0, np.asarray(moduli) - (1.0 - eta)) ** 2))


def companion_moduli(params: ParamVector) -> np.ndarray:
    """(M, d p) eigenvalue moduli of the regime companion matrices."""
    return np.array([np.abs(np.linalg.eigvals(c)) for c in companion_set(params)])


def penalty(spec: ModelSpec, params: ParamVector, T: int, cfg: PenaltyConfig) -> float:
    """kappa T d times the summed squared modulus excesses, all regimes."""
    moduli = companion_moduli(params)
    return cfg.kappa * T * spec.d * excess_moduli_sq(moduli, cfg.eta)


def loglik(
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset,
    lags: np.ndarray | None = None,
    X: np.ndarray | None = None,
) -> float:
    """Exact conditional log-likelihood; -inf when the point is inadmissible.

    Each period contributes -log|det B_t| plus the log-densities of the d
    recovered shocks under their skewed-t marginals.
    """
    try:
        shock_params = params.shock_params()
        path = conditional_path(spec, params, data, lags, X)
    except ParameterError:
        return NEG_INF
    if np.any(path.singular):
        return NEG_INF
    e = batched_solve(path.impacts, path.innovations, path.dets)
    total = -float(np.sum(np.log(np.abs(path.dets))))
    for i, sp in enumerate(shock_params):
        total += float(np.sum(skewt.logpdf(e[:, i], sp)))
    if math.isnan(total):
        return NEG_INF
    return total


def pen_loglik(
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset,
    cfg: PenaltyConfig,
    lags: np.ndarray | None = None,
    X: np.ndarray | None = None,
) -> float:
    """Penalized log-likelihood: loglik minus the stability penalty."""
    ll = loglik(spec, params, data, lags, X)
    if ll == NEG_INF:
        return NEG_INF
    return ll - penalty(spec, params, data.T, cfg)


def nls_objective(spec: ModelSpec, params: ParamVector, data: Dataset) -> float:
    """Sum of squared residuals of the weighted-mean fit (impact-free)."""
    _, mu = mean_path(spec, params, data)
    u = data.body - mu
    return float(np.sum(u * u))


def pnls_objective(
    Q: float, rss_hat: float, moduli: np.ndarray, cfg: PenaltyConfig
) -> float:
    """Penalized sum of squares: Q plus kappa RSS-hat times modulus excesses.

    The penalty is added because Q is minimized; scaling by the best grid
    RSS puts it on the scale of the fit.
    """
    return Q + cfg.kappa * rss_hat * excess_moduli_sq(np.asarray(moduli), cfg.eta)


# ---------------------------------------------------------------------------
# free-coordinate parameterization


LAM_BOUND = 1.0 - 1e-12
S_CLIP = 700.0


@dataclass(frozen=True)
class Parameterization:
    """Pack/unpack between ParamVector and the unconstrained free vector.

    Layout: phi (M d), A (M p d^2), B (M d^2), weight coords, s = log(nu-2),
    r = atanh(lam). The first three-plus-weights blocks form theta1 + sigma;
    the trailing (B, s, r) block is what the global search varies.
    """

    spec: ModelSpec

    @property
    def sizes(self) -> dict:
        d, p, M = self.spec.d, self.spec.p, self.spec.M
        return {
            "phi": M * d,
            "A": M * p * d * d,
            "B": M * d * d,
            "w": self.spec.n_weight_params,
            "s": d,
            "r": d,
        }

    @property
    def n_free(self) -> int:
        return sum(self.sizes.values())

    def _offsets(self) -> dict:
        out, pos = {}, 0
        for key, size in self.sizes.items():
            out[key] = (pos, pos + size)
            pos += size
        return out

    def block(self, name: str) -> slice:
        lo, hi = self._offsets()[name]
        return slice(lo, hi)

    def theta2_indices(self) -> np.ndarray:
        """Indices of (vec B_1..B_M, s, r) inside the free vector."""
        off = self._offsets()
        idx = []
        for key in ("B", "s", "r"):
            idx.extend(range(*off[key]))
        return np.array(idx, dtype=int)

    def pack(self, params: ParamVector) -> np.ndarray:
        d, p, M = self.spec.d, self.spec.p, self.spec.M
        wp = params.weight_params
        if self.spec.weight_kind == "logistic":
            w = np.array([wp[0], np.log(wp[1])])
        else:
            w = np.asarray(wp, dtype=float)
        nu = np.minimum(params.nu, skewt.NU_CAP * 10)
        return np.concatenate(
            [
                params.phi.ravel(),
                params.A.ravel(),
                params.B.ravel(),
                w,
                np.log(nu - 2.0),
                np.arctanh(np.clip(params.lam, -LAM_BOUND, LAM_BOUND)),
            ]
        )

    def unpack(self, vec: np.ndarray) -> ParamVector:
        d, p, M = self.spec.d, self.spec.p, self.spec.M
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.n_free,):
            raise ShapeError(f"free vector has shape {vec.shape}, expected ({self.n_free},)")
        off = self._offsets()
        get = lambda key: vec[slice(*off[key])]
        if self.spec.weight_kind == "logistic":
            wraw = get("w")
            wp = np.array([wraw[0], np.exp(np.clip(wraw[1], -S_CLIP, S_CLIP))])
        else:
            wp = get("w").copy()
        nu = 2.0 + np.exp(np.clip(get("s"), -S_CLIP, S_CLIP))
        lam = np.clip(np.tanh(get("r")), -LAM_BOUND, LAM_BOUND)
        return ParamVector(
            phi=get("phi").reshape(M, d),
            A=get("A").reshape(M, p, d, d),
            B=get("B").reshape(M, d, d),
            weight_params=wp,
            nu=nu,
            lam=lam,
        )


def make_objective(spec: ModelSpec, data: Dataset, cfg: PenaltyConfig, par: Parameterization):
    """Penalized log-likelihood as a function of the free vector."""
    lags = lag_histories(data, spec.p)
    X = design_matrix(lags)

    def f(vec: np.ndarray) -> float:
        try:
            params = par.unpack(vec)
        except (ParameterError, FloatingPointError):
            return NEG_INF
        try:
            return pen_loglik(spec, params, data, cfg, lags, X)
        except ParameterError:
            return NEG_INF

    return f


def _fd_gradient(f, x: np.ndarray, strict: bool):
    """Central finite differences with h_i = max(1e-6, 1e-7 |x_i|)."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    failed = []
    for i in range(x.size):
        h = max(1e-6, 1e-7 * abs(x[i]))
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        fp, fm = f(xp), f(xm)
        p_ok, m_ok = math.isfinite(fp), math.isfinite(fm)
        if p_ok and m_ok:
            g[i] = (fp - fm) / (2.0 * h)
        elif p_ok or m_ok:
            f0 = f(x)
            if not math.isfinite(f0):
                failed.append(i)
                continue
            g[i] = (fp - f0) / h if p_ok else (f0 - fm) / h
        else:
            failed.append(i)
    if failed and strict:
        from .errors import NumericError

        raise NumericError(f"gradient probes failed at coordinates {failed}")
    return g, failed


def loglik_gradient(
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset,
    cfg: PenaltyConfig | None = None,
    strict: bool = True,
) -> np.ndarray:
    """Numerical gradient of the (penalized) log-likelihood in free coordinates."""
    par = Parameterization(spec)
    if cfg is None:
        def f(vec):
            try:
                return loglik(spec, par.unpack(vec), data)
            except ParameterError:
                return NEG_INF
    else:
        f = make_objective(spec, data, cfg, par)
    g, _ = _fd_gradient(f, par.pack(params), strict=strict)
    return g
