"""
Monte Carlo harness tying the ensembles to the analytic bounds.

Every trial is a pure function of (master_seed, trial_index, stream label), so
`run_trials` may hand trials to any number of worker threads and the integer
counts it reduces are identical to a serial run.
"""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np
import psutil
from pydantic import BaseModel, Field, model_validator
from scipy.stats import beta

import config as conf

from .bounds import (
    complex_small_ball,
    dot_small_ball_bound,
    ic_tail_bound,
    incompressible_witness,
    count_heavy_coordinates,
    paley_zygmund_sparse_bound,
    row_bound_tail,
    row_hit_probability,
    norm_threshold,
    shift_bound_constant,
)
from .ensemble import (
    EnsembleSpec,
    ScalarField,
    SeedPath,
    as_dense_matrix,
    assemble_sparse_matrix,
    build_shift_matrix,
    build_shift_witness,
    sample_matrix,
    sample_sparse_column,
    sample_sparse_row,
)
from .formatting import experiment_message_print, experiment_report_print, format_float
from .spectral import (
    distance_to_span,
    hs_norm,
    kernel_unit_vector,
    least_singular_pair,
    least_singular_value,
    operator_norm,
)
from .sphere import ClassificationParams, SphereVerdict, net_approximate, net_cardinality_bound, sample_class_member, sample_v_member

T = TypeVar("T")

# 12 log-spaced points per decade over [1e-3, 1e-1]
DEFAULT_EPS_GRID = np.logspace(-3, -1, 25).tolist()


class TailCurve(BaseModel):
    spec: EnsembleSpec
    eps_grid: list[float]
    trials: int = Field(ge=1)
    successes: list[int]
    p_hat: list[float]
    ci_lo: list[float]
    ci_hi: list[float]
    fitted_exponent: float | None = None
    fit_r2: float | None = None
    fit_points: int = 0
    zero_success_eps: list[float] = []

    @model_validator(mode="after")
    def _consistent(self):
        if any(np.diff(self.eps_grid) <= 0):
            raise ValueError("eps_grid must be strictly increasing")
        for k, lo, p, hi in zip(self.successes, self.ci_lo, self.p_hat, self.ci_hi):
            if not 0 <= k <= self.trials:
                raise ValueError(f"success count {k} outside [0, {self.trials}]")
            if not lo <= p <= hi:
                raise ValueError(f"interval [{lo}, {hi}] does not contain {p}")
        return self

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["eps", "trials", "successes", "p_hat", "ci_lo", "ci_hi"]
        rows = [[e, self.trials, k, p, lo, hi]
                for e, k, p, lo, hi in zip(self.eps_grid, self.successes, self.p_hat, self.ci_lo, self.ci_hi)]
        return headers, rows


class NormConcentration(BaseModel):
    spec: EnsembleSpec
    K_grid: list[float]
    trials: int
    exceedances: list[int]
    frequency: list[float]
    ci_lo: list[float]
    ci_hi: list[float]
    median_scaled_norm: float
    split_holds: int
    max_split_excess: float

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["K", "threshold", "trials", "exceedances", "frequency", "ci_lo", "ci_hi"]
        rows = [[K, norm_threshold(K, self.spec.n, self.spec.delta), self.trials, k, f, lo, hi]
                for K, k, f, lo, hi in zip(self.K_grid, self.exceedances, self.frequency, self.ci_lo, self.ci_hi)]
        return headers, rows


class RowBoundReport(BaseModel):
    n: int
    delta: float
    m: int
    j_size: int
    trials: int
    mean_count: float
    std_error: float
    expected_mean: float
    threshold: float
    chernoff_bound: float
    lower_tail_hits: int
    lower_tail_frequency: float
    ci_lo: float
    ci_hi: float

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["n", "delta", "m", "j_size", "trials", "mean_count", "std_error", "expected_mean",
                   "threshold", "lower_tail_frequency", "chernoff_bound"]
        return headers, [[self.n, self.delta, self.m, self.j_size, self.trials, self.mean_count, self.std_error,
                          self.expected_mean, self.threshold, self.lower_tail_frequency, self.chernoff_bound]]


class SmallBallReport(BaseModel):
    eps_grid: list[float]
    sigma2: float
    samples: int
    hits: list[int]
    frequency: list[float]
    ci_lo: list[float]
    ci_hi: list[float]
    exact: list[float]
    bound: list[float]

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["eps", "samples", "hits", "frequency", "ci_lo", "ci_hi", "exact", "bound"]
        rows = [[e, self.samples, k, f, lo, hi, ex, b] for e, k, f, lo, hi, ex, b in
                zip(self.eps_grid, self.hits, self.frequency, self.ci_lo, self.ci_hi, self.exact, self.bound)]
        return headers, rows


class FrequencyCheck(BaseModel):
    """An empirical frequency against the analytic bound that should dominate it."""

    label: str
    trials: int
    hits: int
    frequency: float
    std_error: float
    bound: float

    @property
    def dominated(self) -> bool:
        return self.frequency <= self.bound + 3.0 * self.std_error


class ZeroOutReport(BaseModel):
    t_grid: list[float]
    trials: int
    hits_x: list[int]
    hits_y: list[int]
    pooled_std_error: list[float]

    @property
    def monotone(self) -> bool:
        return all(kx / self.trials <= ky / self.trials + 3.0 * se
                   for kx, ky, se in zip(self.hits_x, self.hits_y, self.pooled_std_error))


class NetCheckReport(BaseModel):
    n: int
    a: float
    b: float
    d1: float
    d2: float
    samples: int
    violations: int
    max_dist: float
    dist_bound: float
    min_band_mass_x3: float
    band_bound: float
    max_support: int
    log_cardinality_bound: float

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["n", "a", "b", "d1", "d2", "samples", "violations", "max_dist", "dist_bound",
                   "min_band_mass_x3", "band_bound", "max_support", "log_cardinality_bound"]
        return headers, [[self.n, self.a, self.b, self.d1, self.d2, self.samples, self.violations, self.max_dist,
                          self.dist_bound, self.min_band_mass_x3, self.band_bound, self.max_support,
                          self.log_cardinality_bound]]


class IncompressibleReport(BaseModel):
    n: int
    delta: float
    t_grid: list[float]
    trials: int
    hits: list[int]
    frequency: list[float]
    ci_lo: list[float]
    ci_hi: list[float]
    bound: list[float]
    fitted_exponent: float | None = None
    fit_r2: float | None = None
    lambda0: float
    lambda1: float
    min_heavy_fraction: float

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["t", "trials", "hits", "frequency", "ci_lo", "ci_hi", "bound"]
        rows = [[t, self.trials, k, f, lo, hi, b] for t, k, f, lo, hi, b in
                zip(self.t_grid, self.hits, self.frequency, self.ci_lo, self.ci_hi, self.bound)]
        return headers, rows


class PrefactorScan(BaseModel):
    n_grid: list[int]
    t: float
    trials: int
    hits: list[int]
    frequency: list[float]
    fitted_exponent: float | None = None
    fit_r2: float | None = None
    expected_exponent: float


class DistanceReport(BaseModel):
    spec: EnsembleSpec
    trials: int
    inequality_violations: int
    max_inequality_excess: float
    identity_trials: int
    rank_deficient_trials: int
    max_identity_error: float

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["n", "delta", "trials", "inequality_violations", "max_inequality_excess",
                   "identity_trials", "rank_deficient_trials", "max_identity_error"]
        return headers, [[self.spec.n, self.spec.delta, self.trials, self.inequality_violations,
                          self.max_inequality_excess, self.identity_trials, self.rank_deficient_trials,
                          self.max_identity_error]]


class ShiftTrialResult(BaseModel):
    sigma_min: float = Field(ge=0.0)
    corner_was_zero: bool
    bound_value: float
    witness_ratio: float = Field(ge=0.0)
    chain_value: float = Field(ge=0.0)
    product_value: float = Field(ge=0.0)
    unshifted_sigma_min: float = Field(ge=0.0)

    @model_validator(mode="after")
    def _variational(self):
        if self.sigma_min > self.witness_ratio + conf.DEFAULT_TOL * max(1.0, self.sigma_min):
            raise ValueError(f"sigma_min {self.sigma_min} exceeds the witness ratio {self.witness_ratio}")
        return self


class ShiftReport(BaseModel):
    n: int
    t: float
    lam: float
    trials: int
    C: float
    bound_value: float
    corner_zero_trials: int
    corner_zero_frequency: float
    corner_zero_ci: tuple[float, float]
    expected_corner_zero: float
    conditional_bound_hits: int
    conditional_frequency: float
    median_sigma_min: float
    median_unshifted_sigma_min: float

    def table(self) -> tuple[list[str], list[list]]:
        headers = ["n", "t", "lambda", "trials", "C", "bound_value", "corner_zero_trials",
                   "corner_zero_frequency", "expected_corner_zero", "conditional_bound_hits",
                   "conditional_frequency", "median_sigma_min", "median_unshifted_sigma_min"]
        return headers, [[self.n, self.t, self.lam, self.trials, self.C, self.bound_value,
                          self.corner_zero_trials, self.corner_zero_frequency, self.expected_corner_zero,
                          self.conditional_bound_hits, self.conditional_frequency, self.median_sigma_min,
                          self.median_unshifted_sigma_min]]


# --------------------------------------------------------------------------- #
# Statistics and the trial pool
# --------------------------------------------------------------------------- #

def clopper_pearson(successes, trials, level: float = None) -> tuple[np.ndarray, np.ndarray]:
    """
    Exact binomial confidence intervals from beta quantiles.

    Args:
        successes: Success counts (scalar or array).
        trials: Trial counts, broadcast against successes.
        level: Coverage, config.CI_LEVEL when omitted.

    Returns:
        (lo, hi) arrays.
    """
    level = conf.CI_LEVEL if level is None else level
    k = np.asarray(successes, dtype=float)
    n = np.broadcast_to(np.asarray(trials, dtype=float), k.shape)
    if np.any(k < 0) or np.any(k > n):
        raise ValueError("successes must lie in [0, trials]")
    alpha = 1.0 - level
    lo = np.where(k == 0, 0.0, beta.ppf(alpha / 2.0, np.maximum(k, 1.0), n - k + 1.0))
    hi = np.where(k == n, 1.0, beta.ppf(1.0 - alpha / 2.0, k + 1.0, np.maximum(n - k, 1.0)))
    return np.atleast_1d(lo), np.atleast_1d(hi)


def fit_power_law(x, p, weights=None) -> tuple[float, float]:
    """
    Weighted least squares of log p against log x.

    Args:
        x: Positive abscissae.
        p: Positive values.
        weights: Inverse variances of log p; uniform when omitted.

    Returns:
        (exponent, r2) with r2 computed under the same weights.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    if x.shape != p.shape or x.size < 2:
        raise ValueError("need at least two matching points")
    if np.any(x <= 0) or np.any(p <= 0):
        raise ValueError("power-law fit needs positive data")
    w = np.ones_like(x) if weights is None else np.asarray(weights, dtype=float)
    lx, lp = np.log(x), np.log(p)
    # polyfit weights multiply residuals, so pass the square root of inverse variances
    slope, intercept = np.polyfit(lx, lp, 1, w=np.sqrt(w))
    residual = lp - (slope * lx + intercept)
    mean = np.sum(w * lp) / np.sum(w)
    total = np.sum(w * (lp - mean) ** 2)
    r2 = 1.0 - np.sum(w * residual ** 2) / total if total > 0 else 1.0
    return float(slope), float(r2)


def _fit_counts(grid, hits, trials: int) -> tuple[float | None, float | None, int]:
    grid = np.asarray(grid, dtype=float)
    hits = np.asarray(hits)
    usable = (hits >= conf.MIN_FIT_SUCCESSES) & (hits < trials) & (grid > 0)
    if usable.sum() < 2:
        return None, None, int(usable.sum())
    p = hits[usable] / trials
    # Var(log p_hat) ~ (1 - p) / k
    weights = hits[usable] / (1.0 - p)
    exponent, r2 = fit_power_law(grid[usable], p, weights)
    return exponent, r2, int(usable.sum())


def _worker_count(jobs: int | None) -> int:
    jobs = conf.JOBS if jobs is None else jobs
    if jobs is None:
        jobs = psutil.cpu_count(logical=False) or 1
    return max(1, int(jobs))


def run_trials(fn: Callable[[int], T], trials: int, jobs: int = None) -> list[T]:
    """Maps fn over range(trials) on a thread pool, returning results in trial order."""
    workers = _worker_count(jobs)
    if workers == 1 or trials < 2:
        return [fn(i) for i in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(trials)))


def _check_trials(trials: int, minimum: int = 1):
    if trials < minimum:
        raise ValueError(f"need at least {minimum} trials, got {trials}")


def _std_error(p: float, trials: int) -> float:
    return float(np.sqrt(max(p * (1.0 - p), 1.0 / trials) / trials))


# --------------------------------------------------------------------------- #
# Least singular value tail
# --------------------------------------------------------------------------- #

def estimate_tail_curve(spec: EnsembleSpec, eps_grid: Sequence[float], trials: int, master_seed: int,
                        jobs: int = None) -> TailCurve:
    """
    Estimates P[sigma_n(A) <= eps] on a grid and fits its log-log slope.

    One matrix and one sigma_n per trial; every grid point reuses it.

    Args:
        spec: Law of A.
        eps_grid: Strictly increasing positive thresholds.
        trials: Number of matrices, at least 100.
        master_seed: Root of all trial streams.
        jobs: Worker cap.

    Returns:
        TailCurve with exact binomial intervals and the weighted fit over grid
        points with at least config.MIN_FIT_SUCCESSES successes.
    """
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(eps <= 0) or np.any(np.diff(eps) <= 0):
        raise ValueError("eps_grid must be a strictly increasing list of positive values")
    _check_trials(trials, 100)
    experiment_message_print("Tail curve", [("n", spec.n), ("delta", spec.delta), ("field", spec.field.value),
                                            ("trials", trials), ("seed", master_seed)])

    def trial(index: int) -> float:
        A = sample_matrix(spec, SeedPath(master_seed=master_seed, trial_index=index, stream_label="tail"))
        return least_singular_value(A)

    sigmas = np.asarray(run_trials(trial, trials, jobs))
    successes = np.sum(sigmas[:, None] <= eps[None, :], axis=0).astype(int)
    lo, hi = clopper_pearson(successes, trials)
    exponent, r2, points = _fit_counts(eps, successes, trials)

    zero = eps[successes == 0].tolist()
    if zero:
        experiment_report_print("Grid points with zero successes (left out of the fit):", len(zero), is_error=True)
    if exponent is not None:
        experiment_report_print("Fitted exponent:", f"{format_float(exponent, 4)} (r2={format_float(r2, 4)})")
    return TailCurve(spec=spec, eps_grid=eps.tolist(), trials=trials, successes=successes.tolist(),
                     p_hat=(successes / trials).tolist(), ci_lo=lo.tolist(), ci_hi=hi.tolist(),
                     fitted_exponent=exponent, fit_r2=r2, fit_points=points, zero_success_eps=zero)


# --------------------------------------------------------------------------- #
# Operator norm
# --------------------------------------------------------------------------- #

def norm_concentration(spec: EnsembleSpec, K_grid: Sequence[float], trials: int, master_seed: int,
                       jobs: int = None) -> NormConcentration:
    """
    Frequencies of ||A||_op >= K n^(delta/2) per K, and the split ||A|| <= ||Re A|| + ||Im A||.
    """
    _check_trials(trials, 100)
    experiment_message_print("Norm concentration", [("n", spec.n), ("delta", spec.delta), ("trials", trials)])

    def trial(index: int) -> tuple[float, float]:
        A = assemble_sparse_matrix(spec, SeedPath(master_seed=master_seed, trial_index=index, stream_label="norm"))
        full = operator_norm(A)
        split = operator_norm(A.real) + operator_norm(A.imag)
        return full, split

    results = np.asarray(run_trials(trial, trials, jobs))
    norms, splits = results[:, 0], results[:, 1]
    scale = float(spec.n) ** (spec.delta / 2.0)
    K = np.asarray(K_grid, dtype=float)
    exceed = np.sum(norms[:, None] >= K[None, :] * scale, axis=0).astype(int)
    lo, hi = clopper_pearson(exceed, trials)
    slack = conf.DEFAULT_TOL * np.maximum(1.0, norms)
    excess = norms - splits
    holds = int(np.sum(excess <= slack))
    experiment_report_print("Split inequality held in", f"{holds}/{trials} trials", is_error=holds < trials)
    return NormConcentration(spec=spec, K_grid=K.tolist(), trials=trials, exceedances=exceed.tolist(),
                             frequency=(exceed / trials).tolist(), ci_lo=lo.tolist(), ci_hi=hi.tolist(),
                             median_scaled_norm=float(np.median(norms) / scale), split_holds=holds,
                             max_split_excess=float(excess.max()))


# --------------------------------------------------------------------------- #
# Row bound
# --------------------------------------------------------------------------- #

def count_row_bound_set(A, y, J) -> int:
    """
    |I_y(J)|: rows with |A_ij*| >= 1 for some j* in J and A_ij = 0 on the rest of supp(y).

    Indices are 0-based. Entries are compared exactly, with no tolerance.

    Raises:
        ValueError: If J is empty or not contained in supp(y).
    """
    A = as_dense_matrix(A)
    support = np.flatnonzero(np.asarray(y).ravel())
    J = np.unique(np.asarray(list(J), dtype=int))
    if J.size == 0:
        raise ValueError("J must not be empty")
    if not np.all(np.isin(J, support)):
        raise ValueError("J must be a subset of supp(y)")
    block = A[:, support] != 0
    single = block.sum(axis=1) == 1
    j_star = support[np.argmax(block, axis=1)]
    rows = np.arange(A.shape[0])
    large = np.abs(A[rows, j_star]) >= 1.0
    return int(np.sum(single & np.isin(j_star, J) & large))


def row_bound_experiment(n: int, delta: float, m: int, j_size: int, trials: int, master_seed: int,
                         field: ScalarField = ScalarField.COMPLEX, jobs: int = None) -> RowBoundReport:
    """Mean of |I_y(J)| against n c_g |J| p (1-p)^(m-1), and the lower-tail frequency against its Chernoff bound."""
    if not 1 <= j_size <= m <= n:
        raise ValueError(f"need 1 <= j_size <= m <= n, got j_size={j_size}, m={m}, n={n}")
    _check_trials(trials)
    spec = EnsembleSpec(n=n, delta=delta, field=field)
    y = np.zeros(n)
    y[:m] = 1.0
    J = range(j_size)
    experiment_message_print("Row bound", [("n", n), ("delta", delta), ("m", m), ("|J|", j_size), ("trials", trials)])

    def trial(index: int) -> int:
        A = assemble_sparse_matrix(spec, SeedPath(master_seed=master_seed, trial_index=index, stream_label="rowbound"))
        return count_row_bound_set(A, y, J)

    counts = np.asarray(run_trials(trial, trials, jobs))
    threshold, prob = row_bound_tail(j_size, m, delta, n)
    hits = int(np.sum(counts <= threshold))
    lo, hi = clopper_pearson(hits, trials)
    std = float(counts.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return RowBoundReport(n=n, delta=delta, m=m, j_size=j_size, trials=trials, mean_count=float(counts.mean()),
                          std_error=std, expected_mean=n * row_hit_probability(j_size, m, delta, n, field),
                          threshold=threshold, chernoff_bound=prob, lower_tail_hits=hits,
                          lower_tail_frequency=hits / trials, ci_lo=float(lo[0]), ci_hi=float(hi[0]))


# --------------------------------------------------------------------------- #
# Small-ball estimates
# --------------------------------------------------------------------------- #

def complex_small_ball_experiment(eps_grid: Sequence[float], sigma2: float, samples: int,
                                  master_seed: int) -> SmallBallReport:
    """Frequency of |X| <= eps for X ~ N_C(0, sigma2) against the exact value and eps^2/sigma2."""
    _check_trials(samples)
    rng = SeedPath(master_seed=master_seed, stream_label="small-ball").generator()
    moduli = np.abs(rng.standard_normal(samples) + 1j * rng.standard_normal(samples)) * np.sqrt(sigma2 / 2.0)
    eps = np.asarray(eps_grid, dtype=float)
    hits = np.sum(moduli[:, None] <= eps[None, :], axis=0).astype(int)
    lo, hi = clopper_pearson(hits, samples)
    pairs = [complex_small_ball(e, sigma2) for e in eps]
    return SmallBallReport(eps_grid=eps.tolist(), sigma2=sigma2, samples=samples, hits=hits.tolist(),
                           frequency=(hits / samples).tolist(), ci_lo=lo.tolist(), ci_hi=hi.tolist(),
                           exact=[p[0] for p in pairs], bound=[p[1] for p in pairs])


def paley_zygmund_experiment(a_vec, t: float, delta: float, n: int, trials: int,
                             master_seed: int) -> FrequencyCheck:
    """Frequency of sum_i a_i mask_i <= p t sum_i a_i against the Paley-Zygmund bound."""
    _check_trials(trials)
    weights = np.asarray(a_vec, dtype=float)
    bound = paley_zygmund_sparse_bound(weights, t, delta, n)
    p = float(n) ** (delta - 1.0)
    rng = SeedPath(master_seed=master_seed, stream_label="paley-zygmund").generator()
    masks = rng.random((trials, weights.shape[0])) < p
    hits = int(np.sum(masks @ weights <= p * t * weights.sum()))
    freq = hits / trials
    return FrequencyCheck(label="paley-zygmund", trials=trials, hits=hits, frequency=freq,
                          std_error=_std_error(freq, trials), bound=bound)


def dot_small_ball_experiment(x, eps: float, t: float, spec: EnsembleSpec, trials: int, master_seed: int,
                              jobs: int = None) -> FrequencyCheck:
    """Frequency of |R_1 . x| <= eps over sparse rows against the dot-product small-ball bound."""
    _check_trials(trials)
    x = np.asarray(x, dtype=np.complex128).ravel()
    if x.shape[0] != spec.n:
        raise ValueError(f"x has {x.shape[0]} entries, spec has n={spec.n}")
    bound = dot_small_ball_bound(x, eps, t, spec.delta, spec.n)

    def trial(index: int) -> bool:
        row = sample_sparse_row(spec, SeedPath(master_seed=master_seed, trial_index=index, stream_label="row"))
        return bool(abs(np.sum(row * x)) <= eps)

    hits = int(np.sum(run_trials(trial, trials, jobs)))
    freq = hits / trials
    return FrequencyCheck(label="dot-small-ball", trials=trials, hits=hits, frequency=freq,
                          std_error=_std_error(freq, trials), bound=bound)


def zero_out_experiment(spec: EnsembleSpec, x, y, t_grid: Sequence[float], trials: int, master_seed: int,
                        jobs: int = None) -> ZeroOutReport:
    """
    Compares P[||Ax|| <= t] with P[||Ay|| <= t] for |y_i| <= |x_i|.

    Raises:
        ValueError: If y is not dominated by x coordinatewise.
    """
    _check_trials(trials)
    x = np.asarray(x, dtype=np.complex128).ravel()
    y = np.asarray(y, dtype=np.complex128).ravel()
    if np.any(np.abs(y) > np.abs(x)):
        raise ValueError("need |y_i| <= |x_i| for every i")

    def trial(index: int) -> tuple[float, float]:
        A = assemble_sparse_matrix(spec, SeedPath(master_seed=master_seed, trial_index=index, stream_label="zero-out"))
        return float(np.linalg.norm(A @ x)), float(np.linalg.norm(A @ y))

    norms = np.asarray(run_trials(trial, trials, jobs))
    t = np.asarray(t_grid, dtype=float)
    hits_x = np.sum(norms[:, 0][:, None] <= t[None, :], axis=0)
    hits_y = np.sum(norms[:, 1][:, None] <= t[None, :], axis=0)
    pooled = (hits_x + hits_y) / (2.0 * trials)
    se = np.sqrt(np.maximum(2.0 * pooled * (1.0 - pooled), 1.0 / trials) / trials)
    return ZeroOutReport(t_grid=t.tolist(), trials=trials, hits_x=hits_x.astype(int).tolist(),
                         hits_y=hits_y.astype(int).tolist(), pooled_std_error=se.tolist())


# --------------------------------------------------------------------------- #
# Net certificates
# --------------------------------------------------------------------------- #

def net_check_experiment(n: int, a: float, b: float, d1: float, d2: float, samples: int,
                         master_seed: int) -> NetCheckReport:
    """Runs the net approximation on random members of V and counts unsound certificates."""
    _check_trials(samples)
    experiment_message_print("Net check", [("n", n), ("a", a), ("b", b), ("d1", d1), ("d2", d2), ("samples", samples)])
    violations = 0
    max_dist, min_band, max_support = 0.0, np.inf, 0
    for index in range(samples):
        x = sample_v_member(n, a, b, d1, d2, SeedPath(master_seed=master_seed, trial_index=index, stream_label="v-member"))
        _, certificate = net_approximate(x, a, b, d1, d2)
        violations += 0 if certificate.sound else 1
        max_dist = max(max_dist, certificate.dist)
        min_band = min(min_band, certificate.band_mass_x3)
        max_support = max(max_support, certificate.support_size)
    experiment_report_print("Unsound certificates:", violations, is_error=violations > 0)
    return NetCheckReport(n=n, a=a, b=b, d1=d1, d2=d2, samples=samples, violations=violations,
                          max_dist=max_dist, dist_bound=3.0 * np.sqrt(d1), min_band_mass_x3=float(min_band),
                          band_bound=d2 - 57.0 * np.sqrt(d1), max_support=max_support,
                          log_cardinality_bound=net_cardinality_bound(n, min(a, n), d1))


# --------------------------------------------------------------------------- #
# Incompressible inner products
# --------------------------------------------------------------------------- #

def _inner_products(params: ClassificationParams, spec: EnsembleSpec, trials: int, master_seed: int,
                    randomize: bool, jobs: int = None) -> tuple[np.ndarray, np.ndarray]:
    witness = incompressible_witness(params)

    def trial(index: int) -> tuple[float, int]:
        seed = SeedPath(master_seed=master_seed, trial_index=index, stream_label="incompressible")
        eta = sample_class_member(SphereVerdict.IC, params, spec.n, seed.child("eta"), randomize=randomize)
        column = sample_sparse_column(spec, seed.child("column"))
        return abs(np.vdot(eta, column)), count_heavy_coordinates(eta, witness)

    results = run_trials(trial, trials, jobs)
    return np.asarray([r[0] for r in results]), np.asarray([r[1] for r in results])


def incompressible_tail_experiment(params: ClassificationParams, n: int, delta: float, t_grid: Sequence[float],
                                   trials: int, master_seed: int, field: ScalarField = ScalarField.COMPLEX,
                                   jobs: int = None) -> IncompressibleReport:
    """
    Frequencies of |<Y_1, eta>| < t with eta a fresh IC vector of random mass
    profile and Y_1 a fresh sparse column per trial.

    Also fits the t-exponent and records the smallest share of coordinates
    with |eta_i|^2 >= 1/(lambda1 n), which should stay at or above lambda0.
    """
    _check_trials(trials)
    spec = EnsembleSpec(n=n, delta=delta, field=field)
    witness = incompressible_witness(params)
    experiment_message_print("Incompressible tail", [("n", n), ("delta", delta), ("trials", trials)])
    values, heavy = _inner_products(params, spec, trials, master_seed, True, jobs)
    t = np.asarray(t_grid, dtype=float)
    hits = np.sum(values[:, None] < t[None, :], axis=0).astype(int)
    lo, hi = clopper_pearson(hits, trials)
    exponent, r2, _ = _fit_counts(t, hits, trials)
    return IncompressibleReport(n=n, delta=delta, t_grid=t.tolist(), trials=trials, hits=hits.tolist(),
                                frequency=(hits / trials).tolist(), ci_lo=lo.tolist(), ci_hi=hi.tolist(),
                                bound=[ic_tail_bound(v, n, delta, witness) for v in t],
                                fitted_exponent=exponent, fit_r2=r2, lambda0=witness.lambda0,
                                lambda1=witness.lambda1, min_heavy_fraction=float(heavy.min() / n))


def incompressible_prefactor_scan(params: ClassificationParams, n_grid: Sequence[int], delta: float, t: float,
                                  trials: int, master_seed: int, field: ScalarField = ScalarField.COMPLEX,
                                  jobs: int = None) -> PrefactorScan:
    """
    Frequency of |<Y_1, eta>| < t across dimensions, fitted against n (slope near 1 - delta).

    eta keeps the fixed IC profile (uniform when c1 <= 1) so only n moves between grid points.
    """
    _check_trials(trials)
    hits = []
    for n in n_grid:
        spec = EnsembleSpec(n=n, delta=delta, field=field)
        values, _ = _inner_products(params, spec, trials, master_seed, False, jobs)
        hits.append(int(np.sum(values < t)))
    exponent, r2, _ = _fit_counts(n_grid, hits, trials)
    return PrefactorScan(n_grid=list(n_grid), t=t, trials=trials, hits=hits,
                         frequency=[k / trials for k in hits], fitted_exponent=exponent, fit_r2=r2,
                         expected_exponent=1.0 - delta)


# --------------------------------------------------------------------------- #
# Distance reduction
# --------------------------------------------------------------------------- #

def distance_reduction_check(spec: EnsembleSpec, trials: int, master_seed: int, tol: float = None,
                             jobs: int = None) -> DistanceReport:
    """
    Checks |x_i| dist(Y_i, W_i) <= sigma_n for a minimizing x, and dist(Y_1, W_1) = |<Y_1, eta_1>|.

    Y_i is column i of A and W_i the span of the other columns; eta_1 spans the
    kernel of B = [Y_2 ... Y_n]^*. Trials where W_1 is rank deficient are
    counted and left out of the identity check.
    """
    tol = conf.DEFAULT_TOL if tol is None else tol
    if spec.n < 3:
        raise ValueError(f"need n >= 3, got {spec.n}")
    _check_trials(trials)
    experiment_message_print("Distance reduction", [("n", spec.n), ("delta", spec.delta), ("trials", trials)])

    def trial(index: int) -> tuple[float, float | None]:
        A = sample_matrix(spec, SeedPath(master_seed=master_seed, trial_index=index, stream_label="distance"))
        sigma, x = least_singular_pair(A)
        dists = np.array([distance_to_span(A[:, i], np.delete(A, i, axis=1)) for i in range(spec.n)])
        excess = float(np.max(np.abs(x) * dists) - sigma)
        kernel = kernel_unit_vector(A[:, 1:].conj().T)
        if kernel.rank_deficient:
            return excess, None
        return excess, abs(dists[0] - abs(np.vdot(kernel.vector, A[:, 0])))

    results = run_trials(trial, trials, jobs)
    excesses = np.asarray([r[0] for r in results])
    errors = [r[1] for r in results if r[1] is not None]
    violations = int(np.sum(excesses > tol))
    experiment_report_print("Inequality violations:", violations, is_error=violations > 0)
    return DistanceReport(spec=spec, trials=trials, inequality_violations=violations,
                          max_inequality_excess=float(excesses.max()), identity_trials=len(errors),
                          rank_deficient_trials=trials - len(errors),
                          max_identity_error=float(max(errors)) if errors else 0.0)


# --------------------------------------------------------------------------- #
# Shift counterexample
# --------------------------------------------------------------------------- #

def shift_trial_from_matrix(A, t: float, lam: float, C: float) -> ShiftTrialResult:
    """Evaluates the shift construction M + lam A for a given A."""
    A = as_dense_matrix(A)
    n = A.shape[0]
    M = build_shift_matrix(n, t)
    x = build_shift_witness(A, t, lam)
    shifted = M + lam * A
    x_norm = float(np.linalg.norm(x))
    head = A[: n - 1, n - 1]
    block = A[:, : n - 1]
    return ShiftTrialResult(
        sigma_min=least_singular_value(shifted),
        corner_was_zero=bool(A[n - 1, n - 1] == 0),
        bound_value=C * lam ** 2 * float(n) ** 1.5 / t,
        witness_ratio=float(np.linalg.norm(shifted @ x)) / x_norm,
        chain_value=lam ** 2 / t * hs_norm(block) * float(np.linalg.norm(head)) / x_norm,
        # (M + lam A) x = -(lam^2 / t) A_block a_head + lam A_nn e_n
        product_value=lam ** 2 / t * float(np.linalg.norm(block @ head)) / x_norm,
        unshifted_sigma_min=least_singular_value(t * np.eye(n) + lam * A),
    )


def _shift_constant(spec: EnsembleSpec) -> float:
    # entries have variance p and vanish with probability 1 - p
    return shift_bound_constant(variance=spec.p, zero_probability=1.0 - spec.p)


def shift_counterexample_trial(n: int, t: float, lam: float, spec_without_shift: EnsembleSpec, master_seed: int,
                               trial_index: int = 0) -> ShiftTrialResult:
    """
    One draw of the shift construction.

    Samples A from `spec_without_shift`, builds M = t Id with the corner zeroed
    and the witness x, and records sigma_min(M + lam A), whether A_nn = 0, the
    witness ratio ||(M + lam A) x|| / ||x||, the bound C lam^2 n^(3/2) / t and
    the exact product (lam^2/t) ||A_block a_col|| / ||x||, which equals the witness ratio
    when A_nn = 0, and the Hilbert-Schmidt chain (lam^2/t) ||A_block||_HS ||a_col|| / ||x||.
    """
    if t <= 0 or lam <= 0:
        raise ValueError(f"t and lambda must be positive, got t={t}, lambda={lam}")
    if spec_without_shift.n != n:
        raise ValueError(f"spec has n={spec_without_shift.n}, expected {n}")
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    A = assemble_sparse_matrix(spec_without_shift,
                               SeedPath(master_seed=master_seed, trial_index=trial_index, stream_label="shift"))
    return shift_trial_from_matrix(A, t, lam, _shift_constant(spec_without_shift))


def shift_experiment(n: int, t: float, lam: float, spec: EnsembleSpec, trials: int, master_seed: int,
                     jobs: int = None) -> ShiftReport:
    """Aggregates shift trials: P[A_nn = 0] and, on that event, how often sigma_min stays under the bound."""
    _check_trials(trials)
    if spec.p >= 1.0:
        raise ValueError("the shift construction needs P[A_nn = 0] > 0, so delta must give p < 1")
    experiment_message_print("Shift counterexample", [("n", n), ("t", t), ("lambda", lam), ("trials", trials)])
    results = run_trials(lambda i: shift_counterexample_trial(n, t, lam, spec, master_seed, i), trials, jobs)
    zero = [r for r in results if r.corner_was_zero]
    hits = sum(1 for r in zero if r.sigma_min <= r.bound_value)
    lo, hi = clopper_pearson(len(zero), trials)
    C = _shift_constant(spec)
    conditional = hits / len(zero) if zero else 0.0
    experiment_report_print("Conditional bound frequency:", format_float(conditional, 4), is_error=conditional < 0.99)
    return ShiftReport(n=n, t=t, lam=lam, trials=trials, C=C, bound_value=C * lam ** 2 * float(n) ** 1.5 / t,
                       corner_zero_trials=len(zero), corner_zero_frequency=len(zero) / trials,
                       corner_zero_ci=(float(lo[0]), float(hi[0])), expected_corner_zero=1.0 - spec.p,
                       conditional_bound_hits=hits, conditional_frequency=conditional,
                       median_sigma_min=float(np.median([r.sigma_min for r in results])),
                       median_unshifted_sigma_min=float(np.median([r.unshifted_sigma_min for r in results])))
