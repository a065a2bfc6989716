"""Three-step estimation, solution normalization and restriction filtering.

Step 1 profiles the AR parameters out of a penalized least-squares fit on
a grid over the weight-function parameters. Step 2 runs a genetic search
over the impact matrices and shock-distribution parameters with Step 1
held fixed. Step 3 polishes the full vector with a quasi-Newton climb of
the penalized log-likelihood. Steps 2 and 3 are repeated over independent
rounds and the collected local optima are normalized, deduplicated and
ranked; overidentifying restrictions then filter the survivors.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, EmptySelectionError, NumericError, ParameterError
from .likelihood import (
    Parameterization,
    PenaltyConfig,
    _fd_gradient,
    companion_moduli,
    loglik,
    make_objective,
    penalty,
    pnls_objective,
)
from .model import (
    Dataset,
    ModelSpec,
    ParamVector,
    design_matrix,
    lag_histories,
    weight_path,
    weight_spec,
)
from .stationarity import JsrBound

LL_WINDOW_DEFAULT = 5.0
DEDUP_LL_TOL = 0.1
DEDUP_PARAM_TOL = 1e-3


# ---------------------------------------------------------------------------
# configs and containers


@dataclass(frozen=True)
class NlsConfig:
    """Grid search setup for Step 1.

    ``ranges`` optionally pins (low, high) per weight parameter; otherwise
    the location grid spans the observed switching series, the scale grid
    is log-spaced on [0.1, 100], and thresholds sit on sample quantiles
    between 0.1 and 0.9. ``min_contribution`` is the screening mass each
    regime must receive; default three observations per parameter and
    variable, 3 k / d with k parameters per regime.
    """

    grid_points: int = 11
    ranges: tuple | None = None
    min_contribution: float | None = None

    def __post_init__(self):
        if self.grid_points < 2:
            raise ConfigError("need at least two grid points per parameter")
        if self.ranges is not None:
            for lo, hi in self.ranges:
                if not lo < hi:
                    raise ConfigError(f"range ({lo}, {hi}) is not ordered")


@dataclass(frozen=True)
class GaConfig:
    """Genetic-search knobs: sizes, rates, and the init spread."""

    population: int = 64
    generations: int = 200
    crossover_rate: float = 0.9
    mutation_rate: float = 0.15
    mutation_scale: float = 0.25
    tournament: int = 3
    elite: int = 2
    nu_init: tuple = (2.5, 30.0)
    lam_init: tuple = (-0.6, 0.6)
    seed: int = 0

    def __post_init__(self):
        if self.population % 2 or self.population < 4:
            raise ConfigError("population must be even and at least 4")
        for name in ("crossover_rate", "mutation_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class RefineConfig:
    """Step-3 stopping rules."""

    grad_tol: float = 1e-5
    step_tol: float = 1e-9
    max_iter: int = 500


@dataclass(frozen=True)
class Solution:
    """One local optimum with its fit and stability metadata."""

    params: ParamVector
    pen_ll: float
    ll: float
    stability: np.ndarray  # (M,) max companion eigenvalue modulus per regime
    round_id: int
    converged: bool
    normalized: bool = False
    jsr: JsrBound | None = None

    def param_hash(self, spec: ModelSpec) -> str:
        vec = Parameterization(spec).pack(self.params)
        return hashlib.sha256(np.ascontiguousarray(vec).tobytes()).hexdigest()


@dataclass(frozen=True)
class SolutionSet:
    """Ranked, deduplicated local optima from a multi-round run."""

    solutions: tuple
    seed: int
    rounds: int

    def best(self) -> Solution:
        if not self.solutions:
            raise EmptySelectionError("solution set is empty")
        return self.solutions[0]


# ---------------------------------------------------------------------------
# Step 1: penalized NLS on a weight-parameter grid


@dataclass(frozen=True)
class GridPoint:
    weight_params: np.ndarray
    passed_screen: bool
    Q: float = math.inf
    PQ: float = math.inf
    contributions: np.ndarray | None = None


@dataclass(frozen=True)
class Step1Result:
    """Profile-NLS estimate of the AR and weight parameters."""

    phi: np.ndarray
    A: np.ndarray
    weight_params: np.ndarray
    Q: float
    PQ: float
    rss_hat: float
    grid: tuple


def regime_param_count(spec: ModelSpec) -> int:
    """Parameters per regime in the mean equation: d (1 + d p)."""
    return spec.d * (1 + spec.d * spec.p)


def min_contribution(spec: ModelSpec, cfg: NlsConfig) -> float:
    if cfg.min_contribution is not None:
        return cfg.min_contribution
    return 3.0 * regime_param_count(spec) / spec.d


def weight_param_grid(spec: ModelSpec, z: np.ndarray, cfg: NlsConfig) -> list:
    """Candidate weight-parameter vectors, one list entry per grid point."""
    n = cfg.grid_points
    if spec.weight_kind == "exogenous":
        return [np.empty(0)]
    if spec.weight_kind == "logistic":
        if cfg.ranges is not None:
            (c_lo, c_hi), (g_lo, g_hi) = cfg.ranges
        else:
            c_lo, c_hi = float(np.min(z)), float(np.max(z))
            g_lo, g_hi = 0.1, 100.0
        cs = np.linspace(c_lo, c_hi, n)
        gammas = np.geomspace(g_lo, g_hi, n)
        return [np.array([c, g]) for c in cs for g in gammas]
    # threshold: ascending tuples of sample quantiles
    if cfg.ranges is not None:
        lo, hi = cfg.ranges[0]
        candidates = np.linspace(lo, hi, n)
    else:
        candidates = np.quantile(z, np.linspace(0.1, 0.9, n))
    candidates = np.unique(candidates)
    return [np.array(rs) for rs in itertools.combinations(candidates, spec.M - 1)]


def _wls_fit(Y: np.ndarray, X: np.ndarray, alpha: np.ndarray, spec: ModelSpec):
    """Closed-form least squares on the regime-weighted regressor set."""
    T = Y.shape[0]
    k = X.shape[1]
    R = np.empty((T, spec.M * k))
    for m in range(spec.M):
        R[:, m * k : (m + 1) * k] = alpha[:, m : m + 1] * X
    theta, *_ = np.linalg.lstsq(R, Y, rcond=None)
    resid = Y - R @ theta
    Q = float(np.sum(resid * resid))
    phi = np.empty((spec.M, spec.d))
    A = np.empty((spec.M, spec.p, spec.d, spec.d))
    for m in range(spec.M):
        block = theta[m * k : (m + 1) * k]
        phi[m] = block[0]
        for i in range(spec.p):
            A[m, i] = block[1 + i * spec.d : 1 + (i + 1) * spec.d].T
    return phi, A, Q


def _ar_moduli(A: np.ndarray) -> np.ndarray:
    dummy = ParamVector(
        phi=np.zeros((A.shape[0], A.shape[2])),
        A=A,
        B=np.stack([np.eye(A.shape[2])] * A.shape[0]),
        weight_params=np.empty(0),
        nu=np.full(A.shape[2], 3.0),
        lam=np.zeros(A.shape[2]),
    )
    return companion_moduli(dummy)


def step1_pnls(
    spec: ModelSpec,
    data: Dataset,
    nls_cfg: NlsConfig | None = None,
    pen_cfg: PenaltyConfig | None = None,
) -> Step1Result:
    """Grid-profiled penalized NLS for the AR and weight-function parameters."""
    nls_cfg = nls_cfg or NlsConfig()
    pen_cfg = pen_cfg or PenaltyConfig()
    if data.T * data.d <= spec.M * regime_param_count(spec):
        raise ConfigError(
            f"T d = {data.T * data.d} observations cannot pin down "
            f"{spec.M * regime_param_count(spec)} mean parameters"
        )
    lags = lag_histories(data, spec.p)
    X = design_matrix(lags)
    Y = data.body
    if spec.weight_kind == "exogenous":
        z = None
    else:
        z = lags[:, spec.switch_lag, spec.switch_var]
    tmin = min_contribution(spec, nls_cfg)

    candidates = weight_param_grid(spec, z, nls_cfg)
    fits = []
    grid = []
    for wp in candidates:
        try:
            probe = ParamVector(
                phi=np.zeros((spec.M, spec.d)),
                A=np.zeros((spec.M, spec.p, spec.d, spec.d)),
                B=np.stack([np.eye(spec.d)] * spec.M),
                weight_params=wp,
                nu=np.full(spec.d, 3.0),
                lam=np.zeros(spec.d),
            )
            alpha = weight_path(spec, weight_spec(spec, probe), lags, data.T)
        except ParameterError:
            grid.append(GridPoint(wp, passed_screen=False))
            continue
        contrib = alpha.sum(axis=0)
        if np.any(contrib < tmin):
            grid.append(GridPoint(wp, passed_screen=False, contributions=contrib))
            continue
        phi, A, Q = _wls_fit(Y, X, alpha, spec)
        fits.append((wp, phi, A, Q, contrib))

    if not fits:
        raise ConfigError(
            "no weight-parameter grid point leaves every regime with mass "
            f">= {tmin:.1f}; widen the grid ranges or lower min_contribution"
        )
    rss_hat = min(Q for *_ , Q, _ in fits)
    best = None
    for wp, phi, A, Q, contrib in fits:
        moduli = _ar_moduli(A).ravel()
        PQ = pnls_objective(Q, rss_hat, moduli, pen_cfg)
        grid.append(GridPoint(wp, True, Q, PQ, contrib))
        if best is None or PQ < best[0]:
            best = (PQ, wp, phi, A, Q)
    PQ, wp, phi, A, Q = best
    return Step1Result(
        phi=phi, A=A, weight_params=np.asarray(wp), Q=Q, PQ=PQ, rss_hat=rss_hat,
        grid=tuple(grid),
    )


# ---------------------------------------------------------------------------
# Step 2: genetic search over (vec B_m, nu, lam)


def _step1_residual_covs(spec: ModelSpec, data: Dataset, step1: Step1Result):
    """Per-regime innovation covariances from high-weight periods."""
    lags = lag_histories(data, spec.p)
    X = design_matrix(lags)
    probe = _step1_params(spec, step1, np.stack([np.eye(spec.d)] * spec.M))
    alpha = weight_path(spec, weight_spec(spec, probe), lags, data.T)
    theta_m = [
        np.vstack([step1.phi[m][None, :]] + [step1.A[m, i].T for i in range(spec.p)])
        for m in range(spec.M)
    ]
    mu = sum(alpha[:, m : m + 1] * (X @ theta_m[m]) for m in range(spec.M))
    u = data.body - mu
    pooled = np.cov(u.T) + 1e-8 * np.eye(spec.d)
    covs = []
    for m in range(spec.M):
        mask = alpha[:, m] > 0.7
        if mask.sum() >= 5 * spec.d:
            covs.append(np.cov(u[mask].T) + 1e-8 * np.eye(spec.d))
        else:
            covs.append(pooled)
    return covs


def _step1_params(spec: ModelSpec, step1: Step1Result, B: np.ndarray) -> ParamVector:
    return ParamVector(
        phi=step1.phi,
        A=step1.A,
        B=B,
        weight_params=step1.weight_params,
        nu=np.full(spec.d, 10.0),
        lam=np.zeros(spec.d),
    )


def _random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    return q * np.sign(np.diag(r))


def _init_population(spec, covs, ga_cfg, rng, n_chrom):
    """Chromosomes spread over impact factors of the regime covariances."""
    d, M = spec.d, spec.M
    pop = np.empty((ga_cfg.population, n_chrom))
    chols = [np.linalg.cholesky(c) for c in covs]
    scale = np.mean([np.sqrt(np.trace(c) / d) for c in covs])
    nu_lo, nu_hi = ga_cfg.nu_init
    lam_lo, lam_hi = ga_cfg.lam_init
    for j in range(ga_cfg.population):
        pos = 0
        for m in range(M):
            Bm = chols[m] @ _random_orthogonal(d, rng)
            Bm = Bm + 0.1 * scale * rng.standard_normal((d, d))
            pop[j, pos : pos + d * d] = Bm.ravel()
            pos += d * d
        nu = rng.uniform(nu_lo, nu_hi, size=d)
        lam = rng.uniform(lam_lo, lam_hi, size=d)
        pop[j, pos : pos + d] = np.log(nu - 2.0)
        pop[j, pos + d :] = np.arctanh(lam)
    return pop


@dataclass(frozen=True)
class GaResult:
    chromosome: np.ndarray
    fitness: float
    best_history: np.ndarray  # per-generation best-ever fitness


def step2_ga(
    spec: ModelSpec,
    data: Dataset,
    step1: Step1Result,
    ga_cfg: GaConfig | None = None,
    pen_cfg: PenaltyConfig | None = None,
) -> GaResult:
    """Penalized-ML genetic search with Step 1 held fixed; elitist, seeded."""
    ga_cfg = ga_cfg or GaConfig()
    pen_cfg = pen_cfg or PenaltyConfig()
    par = Parameterization(spec)
    obj = make_objective(spec, data, pen_cfg, par)
    base = par.pack(_step1_params(spec, step1, np.stack([np.eye(spec.d)] * spec.M)))
    t2 = par.theta2_indices()

    def fitness(chrom: np.ndarray) -> float:
        vec = base.copy()
        vec[t2] = chrom
        return obj(vec)

    rng = np.random.default_rng(ga_cfg.seed)
    covs = _step1_residual_covs(spec, data, step1)
    pop = _init_population(spec, covs, ga_cfg, rng, len(t2))
    fits = np.array([fitness(c) for c in pop])
    if not np.any(np.isfinite(fits)):
        raise NumericError("every initial chromosome is infeasible")

    best_idx = int(np.argmax(fits))
    best_chrom, best_fit = pop[best_idx].copy(), float(fits[best_idx])
    history = [best_fit]

    n = ga_cfg.population
    for gen in range(ga_cfg.generations):
        order = np.argsort(fits)[::-1]
        elite = pop[order[: ga_cfg.elite]].copy()
        children = [c for c in elite]
        anneal = ga_cfg.mutation_scale * (1.0 - 0.9 * gen / max(1, ga_cfg.generations))
        while len(children) < n:
            pa = _tournament(pop, fits, ga_cfg.tournament, rng)
            pb = _tournament(pop, fits, ga_cfg.tournament, rng)
            if rng.random() < ga_cfg.crossover_rate:
                child = _blx(pa, pb, rng)
            else:
                child = (pa if rng.random() < 0.5 else pb).copy()
            mask = rng.random(child.size) < ga_cfg.mutation_rate
            child[mask] += anneal * rng.standard_normal(int(mask.sum()))
            children.append(child)
        pop = np.array(children[:n])
        fits = np.array([fitness(c) for c in pop])
        gen_best = int(np.argmax(fits))
        if fits[gen_best] > best_fit:
            best_fit = float(fits[gen_best])
            best_chrom = pop[gen_best].copy()
        history.append(best_fit)

    return GaResult(chromosome=best_chrom, fitness=best_fit, best_history=np.array(history))


def _tournament(pop, fits, k, rng):
    idx = rng.integers(0, len(pop), size=k)
    return pop[idx[np.argmax(fits[idx])]]


def _blx(a, b, rng, expand=0.5):
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    span = hi - lo
    return rng.uniform(lo - expand * span, hi + expand * span)


def merge_step2(spec: ModelSpec, step1: Step1Result, ga: GaResult) -> ParamVector:
    """Full parameter vector combining Step 1 and Step 2 estimates."""
    par = Parameterization(spec)
    base = par.pack(_step1_params(spec, step1, np.stack([np.eye(spec.d)] * spec.M)))
    base[par.theta2_indices()] = ga.chromosome
    return par.unpack(base)


# ---------------------------------------------------------------------------
# Step 3: gradient refinement


FINITE_FLOOR = -1e15


def step3_refine(
    spec: ModelSpec,
    data: Dataset,
    init: ParamVector,
    pen_cfg: PenaltyConfig | None = None,
    refine_cfg: RefineConfig | None = None,
    round_id: int = 0,
) -> Solution:
    """Quasi-Newton climb of the penalized log-likelihood from a start point.

    Works in free coordinates with finite-difference gradients; tracks the
    best point ever evaluated so the returned fit never falls below the
    starting value. Repeated line-search failure triggers one simplex
    fallback pass.
    """
    pen_cfg = pen_cfg or PenaltyConfig()
    refine_cfg = refine_cfg or RefineConfig()
    par = Parameterization(spec)
    obj = make_objective(spec, data, pen_cfg, par)
    x0 = par.pack(init)
    f0 = obj(x0)
    if not math.isfinite(f0):
        raise ParameterError("refinement start point has non-finite penalized loglik")

    best = {"x": x0.copy(), "f": f0}

    def neg(x):
        v = obj(x)
        if v > best["f"]:
            best["f"] = v
            best["x"] = np.array(x, copy=True)
        return -v if math.isfinite(v) else -FINITE_FLOOR

    def neg_grad(x):
        g, _ = _fd_gradient(obj, np.asarray(x), strict=False)
        return -g

    res = minimize(
        neg,
        x0,
        jac=neg_grad,
        method="L-BFGS-B",
        options={
            "maxiter": refine_cfg.max_iter,
            "maxfun": 4 * refine_cfg.max_iter + 100,
            "gtol": refine_cfg.grad_tol,
            "ftol": 1e-14,
        },
    )
    converged = bool(res.success)
    if not converged and _linesearch_failed(res):
        simplex = minimize(
            neg,
            best["x"],
            method="Nelder-Mead",
            options={"maxiter": 200 * len(x0), "xatol": refine_cfg.step_tol, "fatol": 1e-10},
        )
        converged = converged or bool(simplex.success)

    params = par.unpack(best["x"])
    ll = loglik(spec, params, data)
    pll = ll - penalty(spec, params, data.T, pen_cfg)
    moduli = companion_moduli(params)
    return Solution(
        params=params,
        pen_ll=pll,
        ll=ll,
        stability=moduli.max(axis=1),
        round_id=round_id,
        converged=converged,
    )


def _linesearch_failed(res) -> bool:
    msg = str(getattr(res, "message", "")).upper()
    return "LINE SEARCH" in msg or "ABNORMAL" in msg


# ---------------------------------------------------------------------------
# normalization, deduplication, multi-round driver


def normalize_params(params: ParamVector):
    """Canonical column order and signs shared by every regime.

    Returns (params, perm, signs): degrees of freedom ascending (ties by
    first-row magnitude of B_1, descending), then each column of B_1 made
    positive at its first maximal-magnitude entry. The same permutation
    and signs are applied to all regimes, nu and lam, so the likelihood is
    untouched.
    """
    B1 = params.B[0]
    perm = np.lexsort((-np.abs(B1[0]), params.nu))
    B = params.B[:, :, perm]
    nu = params.nu[perm]
    lam = params.lam[perm]
    d = B1.shape[0]
    signs = np.ones(d)
    for j in range(d):
        k = int(np.argmax(np.abs(B[0][:, j])))
        if B[0][k, j] < 0:
            signs[j] = -1.0
    B = B * signs[None, None, :]
    lam = lam * signs
    out = ParamVector(
        phi=params.phi, A=params.A, B=B,
        weight_params=params.weight_params, nu=nu, lam=lam,
    )
    return out, perm, signs


def normalize_solution(sol: Solution) -> Solution:
    """Apply the canonical ordering/sign convention; fit values carry over."""
    params, _, _ = normalize_params(sol.params)
    return replace(sol, params=params, normalized=True)


def dedup_solutions(spec: ModelSpec, sols: list) -> list:
    """Collapse solutions equal up to the fit and parameter tolerances."""
    par = Parameterization(spec)
    kept = []
    for sol in sorted(sols, key=lambda s: (-s.pen_ll, s.param_hash(spec))):
        vec = par.pack(sol.params)
        dup = False
        for other, ovec in kept:
            if abs(sol.pen_ll - other.pen_ll) <= DEDUP_LL_TOL and np.max(
                np.abs(vec - ovec)
            ) <= DEDUP_PARAM_TOL:
                dup = True
                break
        if not dup:
            kept.append((sol, vec))
    return [s for s, _ in kept]


def _round_seed(master_seed: int, round_id: int) -> int:
    return int(np.random.SeedSequence([master_seed, round_id]).generate_state(1)[0])


def _run_round(args):
    spec, data, step1, ga_cfg, pen_cfg, refine_cfg, round_id, master_seed = args
    ga_cfg = replace(ga_cfg, seed=_round_seed(master_seed, round_id))
    ga = step2_ga(spec, data, step1, ga_cfg, pen_cfg)
    init = merge_step2(spec, step1, ga)
    return step3_refine(spec, data, init, pen_cfg, refine_cfg, round_id=round_id)


def run_three_step(
    spec: ModelSpec,
    data: Dataset,
    rounds: int = 24,
    nls_cfg: NlsConfig | None = None,
    ga_cfg: GaConfig | None = None,
    pen_cfg: PenaltyConfig | None = None,
    refine_cfg: RefineConfig | None = None,
    seed: int = 0,
    threads: int = 1,
) -> SolutionSet:
    """Full pipeline: one Step 1, then `rounds` seeded Step 2+3 chains.

    Results are normalized, deduplicated and ranked by penalized
    log-likelihood; ties break on a parameter hash. Determinism holds for
    any thread count because every round's seed depends only on
    (seed, round index).
    """
    if rounds < 1:
        raise ConfigError("need at least one estimation round")
    ga_cfg = ga_cfg or GaConfig()
    pen_cfg = pen_cfg or PenaltyConfig()
    refine_cfg = refine_cfg or RefineConfig()
    step1 = step1_pnls(spec, data, nls_cfg, pen_cfg)
    jobs = [
        (spec, data, step1, ga_cfg, pen_cfg, refine_cfg, r, seed) for r in range(rounds)
    ]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            sols = list(pool.map(_run_round, jobs))
    else:
        sols = [_run_round(j) for j in jobs]
    sols = [normalize_solution(s) for s in sols]
    sols = dedup_solutions(spec, sols)
    return SolutionSet(solutions=tuple(sols), seed=seed, rounds=rounds)


# ---------------------------------------------------------------------------
# restrictions and blended-identification filtering


@dataclass(frozen=True)
class SignRestriction:
    """Entry (var, shock) of the impact matrix has the given sign.

    ``regime`` restricts one regime (0-based); None means every regime.
    """

    var: int
    shock: int
    sign: int
    regime: int | None = None


@dataclass(frozen=True)
class DominanceRestriction:
    """|B[var, shock]| > |B[var, other]| in every regime (or one regime)."""

    var: int
    shock: int
    other: int
    regime: int | None = None


@dataclass(frozen=True)
class CrossSignRestriction:
    """Entry (var, shock) is nonzero with the same sign in every regime."""

    var: int
    shock: int


@dataclass(frozen=True)
class RestrictionSet:
    """Predicates over (B_1, ..., B_M) used to label shocks."""

    restrictions: tuple

    def __post_init__(self):
        object.__setattr__(self, "restrictions", tuple(self.restrictions))

    def validate(self, d: int, M: int) -> None:
        for r in self.restrictions:
            idx = [r.var, r.shock] + ([r.other] if isinstance(r, DominanceRestriction) else [])
            if any(not 0 <= i < d for i in idx):
                raise ConfigError(f"restriction index out of range for d={d}: {r}")
            reg = getattr(r, "regime", None)
            if reg is not None and not 0 <= reg < M:
                raise ConfigError(f"restriction regime out of range for M={M}: {r}")
            if isinstance(r, SignRestriction) and r.sign not in (1, -1):
                raise ConfigError(f"sign must be +1 or -1: {r}")

    def passes(self, B: np.ndarray) -> bool:
        return all(self._check(r, B) for r in self.restrictions)

    def failing(self, B: np.ndarray) -> list:
        return [r for r in self.restrictions if not self._check(r, B)]

    @staticmethod
    def _check(r, B: np.ndarray) -> bool:
        regimes = range(B.shape[0]) if getattr(r, "regime", None) is None else [r.regime]
        if isinstance(r, SignRestriction):
            return all(np.sign(B[m][r.var, r.shock]) == r.sign for m in regimes)
        if isinstance(r, DominanceRestriction):
            return all(
                abs(B[m][r.var, r.shock]) > abs(B[m][r.var, r.other]) for m in regimes
            )
        if isinstance(r, CrossSignRestriction):
            vals = np.array([B[m][r.var, r.shock] for m in range(B.shape[0])])
            return bool(np.all(vals > 0.0) or np.all(vals < 0.0))
        raise ConfigError(f"unknown restriction type {type(r).__name__}")


@dataclass(frozen=True)
class Labeling:
    """Column assignment that made a solution satisfy the restrictions.

    ``perm[j]`` is the solution column feeding restriction column j; signs
    apply after the permutation.
    """

    perm: tuple
    signs: tuple


@dataclass(frozen=True)
class FilterResult:
    solutions: tuple
    labelings: tuple
    failure_counts: dict


def _assignments(d: int):
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1.0, -1.0), repeat=d):
            yield perm, signs


def filter_solutions(
    solset: SolutionSet,
    restrictions: RestrictionSet,
    ll_window: float = LL_WINDOW_DEFAULT,
) -> FilterResult:
    """Keep near-best solutions satisfying every restriction under some labeling.

    A labeling is a single column permutation and sign pattern applied to
    every regime's impact matrix at once. When nothing survives, the
    per-restriction failure counts over all candidates are reported.
    """
    if not solset.solutions:
        return FilterResult((), (), {})
    d = solset.solutions[0].params.B.shape[1]
    M = solset.solutions[0].params.B.shape[0]
    restrictions.validate(d, M)
    best = max(s.pen_ll for s in solset.solutions)
    survivors, labelings = [], []
    failure_counts = {repr(r): 0 for r in restrictions.restrictions}
    for sol in solset.solutions:
        if sol.pen_ll < best - ll_window:
            continue
        found = None
        for perm, signs in _assignments(d):
            Bt = sol.params.B[:, :, perm] * np.asarray(signs)[None, None, :]
            if restrictions.passes(Bt):
                found = Labeling(perm=tuple(perm), signs=tuple(signs))
                break
        if found is not None:
            survivors.append(sol)
            labelings.append(found)
        else:
            # count violations under the identity labeling for the report
            for r in restrictions.failing(sol.params.B):
                failure_counts[repr(r)] += 1
    return FilterResult(tuple(survivors), tuple(labelings), failure_counts)
