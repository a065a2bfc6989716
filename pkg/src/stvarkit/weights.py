"""Transition-weight functions mapping histories to points on the M-simplex.

Three kinds are supported: logistic (two regimes, smooth switching on a
lagged endogenous variable), threshold (hard switching on ascending
thresholds), and exogenous (a user-supplied T x M table).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import ConfigError, ParameterError, ShapeError

# Exogenous rows are renormalized when their sum drifts from 1 by less than
# this; larger drift is rejected as a malformed table.
EXOG_RENORM_TOL = 1e-9


@dataclass(frozen=True)
class Logistic:
    """alpha_2 = 1 / (1 + exp(-gamma (z - c))), alpha_1 the complement."""

    c: float
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0.0:
            raise ParameterError(f"logistic scale must be positive, got {self.gamma}")


@dataclass(frozen=True)
class Threshold:
    """One-hot regime indicator on half-open cells (r_{m-1}, r_m]."""

    r: tuple

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        if any(r[i] >= r[i + 1] for i in range(len(r) - 1)):
            raise ParameterError(f"thresholds must be strictly ascending, got {r}")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class Exogenous:
    """Fixed weight table; row t gives the simplex point used at time t."""

    table: np.ndarray

    def __post_init__(self):
        tab = np.asarray(self.table, dtype=float)
        if tab.ndim != 2:
            raise ShapeError("exogenous table must be T x M")
        if np.any(tab < 0.0):
            raise ParameterError("exogenous weights must be nonnegative")
        sums = tab.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > EXOG_RENORM_TOL):
            worst = int(np.argmax(np.abs(sums - 1.0)))
            raise ParameterError(
                f"exogenous row {worst} sums to {sums[worst]:.12f}, too far from 1"
            )
        tab = tab / sums[:, None]
        tab[:, -1] = 1.0 - tab[:, :-1].sum(axis=1)
        tab.flags.writeable = False
        object.__setattr__(self, "table", tab)


@dataclass(frozen=True)
class WeightSpec:
    """Weight kind plus, for endogenous kinds, the switching-variable selector.

    ``switch_var`` and ``switch_lag`` are 0-based: the switching variable is
    component ``switch_var`` of y at lag ``switch_lag + 1``.
    """

    kind: Logistic | Threshold | Exogenous
    switch_var: int = 0
    switch_lag: int = 0

    @property
    def n_regimes(self) -> int:
        if isinstance(self.kind, Logistic):
            return 2
        if isinstance(self.kind, Threshold):
            return len(self.kind.r) + 1
        return self.kind.table.shape[1]


def switching_value(spec: WeightSpec, lag_vector: np.ndarray) -> float:
    """Extract z_t from a (p, d) history with row 0 = y_{t-1}."""
    lv = np.asarray(lag_vector, dtype=float)
    if lv.ndim != 2:
        raise ShapeError("lag_vector must be (p, d)")
    if spec.switch_lag >= lv.shape[0] or spec.switch_var >= lv.shape[1]:
        raise ShapeError(
            f"switch selector ({spec.switch_var}, lag {spec.switch_lag + 1}) "
            f"out of range for history shape {lv.shape}"
        )
    return float(lv[spec.switch_lag, spec.switch_var])


def _logistic_alpha2(z, c: float, gamma: float):
    # expit saturates cleanly to 0/1 for |gamma (z - c)| beyond ~745; the
    # product may overflow to +-inf for optimizer-probed gammas, which
    # expit also maps to exactly 0/1
    with np.errstate(over="ignore"):
        return expit(gamma * (np.asarray(z, dtype=float) - c))


def _threshold_onehot(z, r: tuple) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=float))
    # values exactly on a threshold belong to the lower regime
    idx = np.searchsorted(np.asarray(r), z, side="left")
    out = np.zeros((z.shape[0], len(r) + 1))
    out[np.arange(z.shape[0]), idx] = 1.0
    return out


def eval_weights(spec: WeightSpec, lag_vector=None, t: int | None = None) -> np.ndarray:
    """Weights for one period: nonnegative, summing to one exactly.

    Endogenous kinds read z_t off ``lag_vector``; the exogenous kind looks
    up row ``t`` (0-based) of its table.
    """
    if isinstance(spec.kind, Exogenous):
        if t is None:
            raise ConfigError("exogenous weights need the time index t")
        table = spec.kind.table
        if not 0 <= t < table.shape[0]:
            raise IndexError(f"t={t} outside exogenous table of length {table.shape[0]}")
        return table[t].copy()
    z = switching_value(spec, lag_vector)
    if isinstance(spec.kind, Logistic):
        a2 = float(_logistic_alpha2(z, spec.kind.c, spec.kind.gamma))
        return np.array([1.0 - a2, a2])
    return _threshold_onehot(z, spec.kind.r)[0]


def eval_weights_path(spec: WeightSpec, z: np.ndarray | None, t0: int, T: int) -> np.ndarray:
    """Vectorized weights for t = t0 .. t0+T-1 given the switching series z."""
    if isinstance(spec.kind, Exogenous):
        table = spec.kind.table
        if t0 < 0 or t0 + T > table.shape[0]:
            raise IndexError(
                f"periods [{t0}, {t0 + T}) outside exogenous table of length {table.shape[0]}"
            )
        return table[t0 : t0 + T].copy()
    z = np.asarray(z, dtype=float)
    if isinstance(spec.kind, Logistic):
        a2 = _logistic_alpha2(z, spec.kind.c, spec.kind.gamma)
        return np.column_stack([1.0 - a2, a2])
    return _threshold_onehot(z, spec.kind.r)


@dataclass(frozen=True)
class ExogenousReport:
    """Outcome of the identification-relevant checks on an exogenous table."""

    linearly_independent: bool
    rank: int
    strictly_positive_row: bool

    @property
    def ok(self) -> bool:
        return self.linearly_independent and self.strictly_positive_row


def validate_exogenous(table) -> ExogenousReport:
    """Check for M linearly independent rows and a strictly positive row."""
    tab = Exogenous(table).table
    M = tab.shape[1]
    rank = int(np.linalg.matrix_rank(tab, tol=1e-10))
    positive = bool(np.any(np.all(tab > 0.0, axis=1)))
    return ExogenousReport(rank >= M, rank, positive)


def logistic_threshold_limit(spec: WeightSpec, gamma_large: float = 1e7) -> WeightSpec:
    """Threshold spec a steep logistic degenerates to.

    For gamma >= ~1e6 the logistic weights match the returned threshold
    weights to 1e-6 outside a shrinking band around z = c.
    """
    if not isinstance(spec.kind, Logistic):
        raise ConfigError("only logistic specs have a threshold limit")
    if gamma_large < 1e6:
        raise ParameterError("limit only meaningful for gamma >= 1e6")
    return WeightSpec(
        kind=Threshold((spec.kind.c,)),
        switch_var=spec.switch_var,
        switch_lag=spec.switch_lag,
    )
