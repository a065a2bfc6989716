"""Zero-mean, unit-variance skewed t-distribution for structural shocks.

The distribution has two parameters: degrees of freedom ``nu > 2`` (fat
tails; Gaussian as ``nu -> inf``) and skewness ``lam in (-1, 1)``. Density,
CDF and quantile are piecewise around the knot ``-a/b``, with each piece a
rescaled Student t. The Student-t CDF/quantile come from scipy (incomplete
beta), the rest is closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from .errors import DomainError, ParameterError

# Above this, nu is numerically indistinguishable from the Gaussian limit;
# estimates routinely drift to huge values, so we cap instead of overflowing.
NU_CAP = 1e7

_SQRT_2PI = np.sqrt(2.0 * np.pi)


def _norm_const(nu: float) -> float:
    # Gamma((nu+1)/2) / (sqrt(pi (nu-2)) Gamma(nu/2)), in log space for large nu
    lg = special.gammaln((nu + 1.0) / 2.0) - special.gammaln(nu / 2.0)
    return float(np.exp(lg - 0.5 * np.log(np.pi * (nu - 2.0))))


@dataclass(frozen=True)
class SkewTParams:
    """Validated (nu, lam) pair with the derived constants a, b, c.

    The constants are recomputed on construction; instances are immutable
    so they can never go stale.
    """

    nu: float
    lam: float
    a: float = field(init=False)
    b: float = field(init=False)
    c: float = field(init=False)
    gaussian: bool = field(init=False)

    def __post_init__(self):
        if not np.isfinite(self.lam) or abs(self.lam) >= 1.0:
            raise ParameterError(f"skewness must be in (-1, 1), got {self.lam}")
        if not self.nu > 2.0:
            raise ParameterError(f"degrees of freedom must exceed 2, got {self.nu}")
        gaussian = self.nu > NU_CAP
        if gaussian:
            c = 1.0 / _SQRT_2PI
            a = 4.0 * self.lam * c
        else:
            c = _norm_const(self.nu)
            a = 4.0 * self.lam * c * (self.nu - 2.0) / (self.nu - 1.0)
        b = float(np.sqrt(1.0 + 3.0 * self.lam**2 - a**2))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gaussian", gaussian)

    @property
    def knot(self) -> float:
        """Abscissa where the density switches between its two t-pieces."""
        return -self.a / self.b


def _sides(x: np.ndarray, p: SkewTParams):
    """Scaled argument z and the per-point skew divisor (1 -/+ lam)."""
    left = x < p.knot
    div = np.where(left, 1.0 - p.lam, 1.0 + p.lam)
    z = (p.b * x + p.a) / div
    return z, div, left


def logpdf(x, p: SkewTParams) -> np.ndarray:
    """Log-density, vectorized over x; stable for nu up to the cap."""
    x = np.asarray(x, dtype=float)
    z, _, _ = _sides(x, p)
    if p.gaussian:
        return np.log(p.b * p.c) - 0.5 * z**2
    return np.log(p.b * p.c) - 0.5 * (p.nu + 1.0) * np.log1p(z**2 / (p.nu - 2.0))


def pdf(x, p: SkewTParams) -> np.ndarray:
    """Density; strictly positive for all finite x."""
    return np.exp(logpdf(x, p))


def cdf(x, p: SkewTParams) -> np.ndarray:
    """Distribution function. The left piece carries mass (1 - lam)/2."""
    x = np.asarray(x, dtype=float)
    z, _, left = _sides(x, p)
    if p.gaussian:
        tail = stats.norm.cdf(z)
    else:
        tail = stats.t.cdf(np.sqrt(p.nu / (p.nu - 2.0)) * z, df=p.nu)
    out = np.where(
        left,
        (1.0 - p.lam) * tail,
        (1.0 - p.lam) / 2.0 + (1.0 + p.lam) * (tail - 0.5),
    )
    return out if out.ndim else float(out)


def quantile(u, p: SkewTParams):
    """Inverse CDF; u must lie strictly inside (0, 1)."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise DomainError("probability must be strictly inside (0, 1)")
    left_mass = (1.0 - p.lam) / 2.0
    left = u < left_mass
    q = np.where(left, u / (1.0 - p.lam), (u - left_mass) / (1.0 + p.lam) + 0.5)
    if p.gaussian:
        s = stats.norm.ppf(q)
        scale = 1.0
    else:
        s = stats.t.ppf(q, df=p.nu)
        scale = np.sqrt((p.nu - 2.0) / p.nu)
    div = np.where(left, 1.0 - p.lam, 1.0 + p.lam)
    x = (div * scale * s - p.a) / p.b
    return x if x.ndim else float(x)


def sample(n: int, p: SkewTParams, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws by inverse-CDF; bitwise reproducible given the rng state."""
    u = rng.random(n)
    # rng.random can return exactly 0.0; nudge into the open interval
    u = np.clip(u, np.finfo(float).tiny, 1.0 - np.finfo(float).epsneg)
    return np.asarray(quantile(u, p))
