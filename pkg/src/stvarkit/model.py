"""The smooth-transition VAR process: containers, simulation, residuals.

Parameter layout follows the convention that matrices are stored row-major
and histories are stored most-recent-first: a lag vector is a (p, d) array
whose row j holds y_{t-1-j}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import skewt
from .errors import ConfigError, ParameterError, ShapeError, SingularMatrixError
from .linalg import SINGULARITY_RTOL, solve
from .weights import Exogenous, Logistic, Threshold, WeightSpec, eval_weights, eval_weights_path

DEFAULT_BURNIN = 1000


@dataclass(frozen=True)
class ModelSpec:
    """Static shape of the model: dimensions plus the weight-function kind.

    ``weight_kind`` is one of "logistic", "threshold", "exogenous". For the
    endogenous kinds the switching variable is component ``switch_var`` of y
    at lag ``switch_lag + 1`` (both 0-based).
    """

    d: int
    p: int
    M: int
    weight_kind: str
    switch_var: int = 0
    switch_lag: int = 0
    exog_table: np.ndarray | None = None

    def __post_init__(self):
        if self.d < 2 or self.p < 1 or self.M < 1:
            raise ConfigError(f"need d >= 2, p >= 1, M >= 1, got ({self.d}, {self.p}, {self.M})")
        if self.weight_kind not in ("logistic", "threshold", "exogenous"):
            raise ConfigError(f"unknown weight kind {self.weight_kind!r}")
        if self.weight_kind == "logistic" and self.M != 2:
            raise ConfigError("logistic weights are defined for exactly two regimes")
        if self.weight_kind == "exogenous" and self.exog_table is None:
            raise ConfigError("exogenous weights need a table")
        if self.weight_kind != "exogenous":
            if not (0 <= self.switch_var < self.d and 0 <= self.switch_lag < self.p):
                raise ConfigError("switch selector out of range")

    @property
    def n_weight_params(self) -> int:
        return {"logistic": 2, "threshold": self.M - 1, "exogenous": 0}[self.weight_kind]


@dataclass(frozen=True)
class ParamVector:
    """One point in parameter space.

    phi: (M, d) intercepts; A: (M, p, d, d) AR matrices; B: (M, d, d)
    impact matrices; weight_params: (c, gamma) for logistic, ascending
    thresholds for threshold, empty for exogenous; nu, lam: (d,) shock
    distribution parameters.
    """

    phi: np.ndarray
    A: np.ndarray
    B: np.ndarray
    weight_params: np.ndarray
    nu: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        for name in ("phi", "A", "B", "weight_params", "nu", "lam"):
            arr = np.ascontiguousarray(np.asarray(getattr(self, name), dtype=float))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def validate(self, spec: ModelSpec) -> None:
        """Raise unless shapes match the spec and every invariant holds."""
        d, p, M = spec.d, spec.p, spec.M
        expect = {
            "phi": (M, d),
            "A": (M, p, d, d),
            "B": (M, d, d),
            "weight_params": (spec.n_weight_params,),
            "nu": (d,),
            "lam": (d,),
        }
        for name, shape in expect.items():
            got = getattr(self, name).shape
            if got != shape:
                raise ShapeError(f"{name} has shape {got}, expected {shape}")
        for m in range(M):
            scale = float(np.prod(np.sqrt((self.B[m] ** 2).sum(axis=1))))
            if abs(np.linalg.det(self.B[m])) <= SINGULARITY_RTOL * max(scale, 1e-300):
                raise ParameterError(f"impact matrix of regime {m} is singular")
        for i in range(d):
            skewt.SkewTParams(self.nu[i], self.lam[i])  # raises on bad values
        weight_spec(spec, self)  # raises on bad weight params

    def shock_params(self) -> list:
        return [skewt.SkewTParams(self.nu[i], self.lam[i]) for i in range(len(self.nu))]


def weight_spec(spec: ModelSpec, params: ParamVector) -> WeightSpec:
    """Join the spec's weight kind with the parameter vector's weight values."""
    wp = params.weight_params
    if spec.weight_kind == "logistic":
        kind = Logistic(c=float(wp[0]), gamma=float(wp[1]))
    elif spec.weight_kind == "threshold":
        kind = Threshold(tuple(wp))
    else:
        kind = Exogenous(spec.exog_table)
    return WeightSpec(kind=kind, switch_var=spec.switch_var, switch_lag=spec.switch_lag)


@dataclass(frozen=True)
class Dataset:
    """p presample rows followed by the T-row observation body."""

    presample: np.ndarray
    body: np.ndarray
    names: tuple

    def __post_init__(self):
        pres = np.ascontiguousarray(np.asarray(self.presample, dtype=float))
        body = np.ascontiguousarray(np.asarray(self.body, dtype=float))
        if pres.ndim != 2 or body.ndim != 2 or pres.shape[1] != body.shape[1]:
            raise ShapeError("presample and body must be 2-d with matching width")
        if not (np.all(np.isfinite(pres)) and np.all(np.isfinite(body))):
            raise ShapeError("dataset contains missing or non-finite values")
        if body.shape[0] < 1:
            raise ShapeError("dataset body is empty")
        pres.flags.writeable = False
        body.flags.writeable = False
        object.__setattr__(self, "presample", pres)
        object.__setattr__(self, "body", body)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def T(self) -> int:
        return self.body.shape[0]

    @property
    def d(self) -> int:
        return self.body.shape[1]

    def full(self) -> np.ndarray:
        return np.vstack([self.presample, self.body])


def lag_histories(data: Dataset, p: int) -> np.ndarray:
    """(T, p, d) stack of lag vectors; entry [t, j] is y_{t-1-j}."""
    if data.presample.shape[0] != p:
        raise ShapeError(f"presample has {data.presample.shape[0]} rows, expected p={p}")
    full = data.full()
    T = data.T
    out = np.empty((T, p, data.d))
    for j in range(p):
        out[:, j, :] = full[p - 1 - j : p - 1 - j + T]
    return out


def design_matrix(lags: np.ndarray) -> np.ndarray:
    """(T, 1 + d p) regressor rows [1, y_{t-1}', ..., y_{t-p}']."""
    T = lags.shape[0]
    return np.column_stack([np.ones(T), lags.reshape(T, -1)])


def coefficient_stack(params: ParamVector) -> np.ndarray:
    """(M, 1 + d p, d) so that design @ stack[m] gives regime m's means."""
    M, p, d = params.A.shape[0], params.A.shape[1], params.A.shape[2]
    out = np.empty((M, 1 + d * p, d))
    for m in range(M):
        out[m, 0] = params.phi[m]
        for i in range(p):
            out[m, 1 + i * d : 1 + (i + 1) * d] = params.A[m, i].T
    return out


def regime_means(params: ParamVector, lag_vector) -> np.ndarray:
    """(M, d) regime-conditional means phi_m + sum_i A_{m,i} y_{t-i}."""
    lv = np.asarray(lag_vector, dtype=float)
    M, p, d = params.A.shape[0], params.A.shape[1], params.A.shape[2]
    if lv.shape != (p, d):
        raise ShapeError(f"lag vector has shape {lv.shape}, expected {(p, d)}")
    out = np.array(params.phi, copy=True)
    for m in range(M):
        for i in range(p):
            out[m] += params.A[m, i] @ lv[i]
    return out


def cond_mean(weights_t, means: np.ndarray) -> np.ndarray:
    """Convex combination of regime means under the period's weights."""
    w = np.asarray(weights_t, dtype=float)
    return w @ means


def impact_matrix(params: ParamVector, weights_t, t: int | None = None) -> np.ndarray:
    """Weighted sum of the regime impact matrices; must stay invertible."""
    w = np.asarray(weights_t, dtype=float)
    B = np.einsum("m,mij->ij", w, params.B)
    scale = float(np.prod(np.sqrt((B**2).sum(axis=1))))
    if abs(np.linalg.det(B)) <= SINGULARITY_RTOL * max(scale, 1e-300):
        raise SingularMatrixError(
            "combined impact matrix is singular", t=t, weights=w.copy()
        )
    return B


def cond_cov(params: ParamVector, weights_t) -> np.ndarray:
    """Conditional covariance; equals the impact matrix times its transpose."""
    B = impact_matrix(params, weights_t)
    return B @ B.T


def unconditional_mean(params: ParamVector, m: int) -> np.ndarray:
    """Fixed point (I - sum_i A_{m,i})^{-1} phi_m of regime m's mean map."""
    d = params.phi.shape[1]
    return solve(np.eye(d) - params.A[m].sum(axis=0), params.phi[m])


@dataclass(frozen=True)
class ConditionalPath:
    """Per-period pieces of the conditional law along observed data."""

    weights: np.ndarray  # (T, M)
    mu: np.ndarray  # (T, d) conditional means
    impacts: np.ndarray  # (T, d, d)
    innovations: np.ndarray  # (T, d) y_t - mu_t
    dets: np.ndarray  # (T,) det of each impact matrix
    singular: np.ndarray  # (T,) bool mask


def weight_path(spec: ModelSpec, wspec: WeightSpec, lags: np.ndarray, T: int) -> np.ndarray:
    """(T, M) weights along the data, for any weight kind."""
    if spec.weight_kind == "exogenous":
        return eval_weights_path(wspec, None, 0, T)
    z = lags[:, spec.switch_lag, spec.switch_var]
    return eval_weights_path(wspec, z, 0, T)


def mean_path(
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset,
    lags: np.ndarray | None = None,
    X: np.ndarray | None = None,
):
    """(weights (T, M), conditional means (T, d)) along the data."""
    if lags is None:
        lags = lag_histories(data, spec.p)
    if X is None:
        X = design_matrix(lags)
    alpha = weight_path(spec, weight_spec(spec, params), lags, data.T)
    theta = coefficient_stack(params)
    mu = alpha[:, 0:1] * (X @ theta[0])
    for m in range(1, spec.M):
        mu += alpha[:, m : m + 1] * (X @ theta[m])
    return alpha, mu


def batched_det(Bt: np.ndarray) -> np.ndarray:
    """Determinants of a (T, d, d) stack; closed form for d = 2."""
    if Bt.shape[1] == 2:
        return Bt[:, 0, 0] * Bt[:, 1, 1] - Bt[:, 0, 1] * Bt[:, 1, 0]
    return np.linalg.det(Bt)


def batched_solve(Bt: np.ndarray, u: np.ndarray, dets: np.ndarray) -> np.ndarray:
    """Solve B_t e_t = u_t for a (T, d, d) stack; closed form for d = 2."""
    if Bt.shape[1] == 2:
        e0 = (Bt[:, 1, 1] * u[:, 0] - Bt[:, 0, 1] * u[:, 1]) / dets
        e1 = (Bt[:, 0, 0] * u[:, 1] - Bt[:, 1, 0] * u[:, 0]) / dets
        return np.column_stack([e0, e1])
    return np.linalg.solve(Bt, u[:, :, None])[:, :, 0]


def conditional_path(
    spec: ModelSpec,
    params: ParamVector,
    data: Dataset,
    lags: np.ndarray | None = None,
    X: np.ndarray | None = None,
) -> ConditionalPath:
    """Vectorized weights, means, impact matrices and innovations over t=1..T."""
    alpha, mu = mean_path(spec, params, data, lags, X)
    Bt = np.tensordot(alpha, params.B, axes=(1, 0))
    dets = batched_det(Bt)
    scale = np.prod(np.sqrt((Bt**2).sum(axis=2)), axis=1)
    singular = np.abs(dets) <= SINGULARITY_RTOL * np.maximum(scale, 1e-300)
    return ConditionalPath(alpha, mu, Bt, data.body - mu, dets, singular)


@dataclass(frozen=True)
class SimulationResult:
    """Simulated data plus the latent records tests and GIRFs need."""

    data: Dataset
    shocks: np.ndarray  # (T, d)
    weights: np.ndarray  # (T, M)
    impacts: np.ndarray  # (T, d, d)


def _draw_shocks(params: ParamVector, n: int, rng: np.random.Generator) -> np.ndarray:
    """(n, d) i.i.d. structural shocks, one skewed-t stream per component."""
    d = len(params.nu)
    u = rng.random((n, d))
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
    out = np.empty((n, d))
    for i, sp in enumerate(params.shock_params()):
        out[:, i] = skewt.quantile(u[:, i], sp)
    return out


def step(
    spec: ModelSpec,
    params: ParamVector,
    history: np.ndarray,
    shock: np.ndarray,
    wspec: WeightSpec | None = None,
    t: int | None = None,
):
    """Advance one period; returns (y_t, weights_t, B_t)."""
    if wspec is None:
        wspec = weight_spec(spec, params)
    w = eval_weights(wspec, history, t=t)
    mu = cond_mean(w, regime_means(params, history))
    B = impact_matrix(params, w, t=t)
    return mu + B @ shock, w, B


def simulate(
    spec: ModelSpec,
    params: ParamVector,
    T: int,
    presample: np.ndarray | None = None,
    burnin: int = DEFAULT_BURNIN,
    seed=0,
) -> SimulationResult:
    """Simulate T periods; deterministic given the seed.

    Without a presample, the chain starts at regime 0's unconditional mean
    perturbed by one impact-scaled shock per row and runs ``burnin`` discarded
    periods first. Exogenous weights are tied to calendar time, so they
    require an explicit presample.
    """
    params.validate(spec)
    rng = np.random.default_rng(seed)
    d, p = spec.d, spec.p
    wspec = weight_spec(spec, params)

    if presample is not None:
        history = np.asarray(presample, dtype=float)[::-1].copy()  # row 0 = most recent
        if history.shape != (p, d):
            raise ShapeError(f"presample has shape {history.shape}, expected {(p, d)}")
        n_burn = 0
    else:
        if spec.weight_kind == "exogenous":
            raise ConfigError("exogenous weights require an explicit presample")
        mu0 = unconditional_mean(params, 0)
        init_shocks = _draw_shocks(params, p, rng)
        history = mu0[None, :] + init_shocks @ params.B[0].T
        n_burn = burnin

    shocks = _draw_shocks(params, n_burn + T, rng)
    names = tuple(f"y{i + 1}" for i in range(d))
    body = np.empty((T, d))
    w_rec = np.empty((T, spec.M))
    B_rec = np.empty((T, d, d))
    pres = history[::-1].copy()

    for k in range(n_burn + T):
        t = k - n_burn
        if t == 0:
            pres = history[::-1].copy()  # the p rows preceding body[0]
        y, w, B = step(spec, params, history, shocks[k], wspec, t=t if t >= 0 else None)
        if t >= 0:
            body[t] = y
            w_rec[t] = w
            B_rec[t] = B
        history = np.vstack([y[None, :], history[:-1]]) if p > 1 else y[None, :].copy()

    data = Dataset(presample=pres, body=body, names=names)
    return SimulationResult(data=data, shocks=shocks[n_burn:], weights=w_rec, impacts=B_rec)


@dataclass(frozen=True)
class Residuals:
    """Reduced-form innovations u_t and recovered structural shocks e_t."""

    u: np.ndarray  # (T, d)
    e: np.ndarray  # (T, d)
    weights: np.ndarray  # (T, M)


def residuals(spec: ModelSpec, params: ParamVector, data: Dataset) -> Residuals:
    """u_t = y_t - mu_t and e_t solving B_t e_t = u_t, for every period."""
    path = conditional_path(spec, params, data)
    if np.any(path.singular):
        t_bad = int(np.argmax(path.singular))
        raise SingularMatrixError(
            "combined impact matrix is singular", t=t_bad, weights=path.weights[t_bad]
        )
    e = np.linalg.solve(path.impacts, path.innovations[:, :, None])[:, :, 0]
    return Residuals(u=path.innovations, e=e, weights=path.weights)
