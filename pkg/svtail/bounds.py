"""
Closed-form probability bounds and the two constant-selection procedures.

Quantities that can underflow double precision (the schedule masses d1_k, the
constants eps1, eps2, c1 and delta') are carried as natural logarithms and only
exponentiated for display. The selection inequalities are compared in log form,
or as per-dimension exponents when both sides are n-th powers.
"""

import math
from fractions import Fraction
from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator
from scipy.stats import norm

import config as conf

from .ensemble import ScalarField
from .errors import InfeasibleConstantsError, InfeasibleScheduleError
from .sphere import ClassificationParams, net_cardinality_bound

NET_CONSTANT = 57.0
NORM_CONSTANT = 320.0

# P[|X| >= 1]: |X|^2 ~ Exp(1) for X ~ N_C(0, 1); two-sided normal tail for the real field
C_G_COMPLEX = math.exp(-1.0)
C_G_REAL = float(2.0 * norm.sf(1.0))


def c_g(field: ScalarField = ScalarField.COMPLEX) -> float:
    return C_G_COMPLEX if ScalarField(field) == ScalarField.COMPLEX else C_G_REAL


class IncompWitness(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda0: float = Field(gt=0.0)
    lambda1: float = Field(gt=0.0)


class TailBounds(BaseModel):
    ginibre_real: float
    ginibre_complex: float
    ru_specialized: float
    main: float


class McConstants(BaseModel):
    """Constants produced by the chronological selection, with the tiny ones stored as logs."""

    model_config = ConfigDict(frozen=True)

    K: float = Field(gt=0.0)
    delta: float = Field(gt=0.0, lt=1.0)
    c2: float = Field(gt=0.0)
    t: float = Field(gt=0.0, lt=1.0)
    log_eps1: float = Field(lt=0.0)
    log_eps2: float = Field(lt=0.0)
    log_c1: float
    log_delta_prime: float = Field(lt=0.0)
    log_schedule_budget: float = Field(lt=0.0)

    @model_validator(mode="after")
    def _t_halves_mass(self):
        if abs((1.0 - self.t) ** 2 - 0.5) > 1e-12:
            raise ValueError(f"(1 - t)^2 must equal 0.5, got {(1.0 - self.t) ** 2}")
        return self

    @computed_field
    @property
    def eps1(self) -> float:
        return math.exp(self.log_eps1)

    @computed_field
    @property
    def eps2(self) -> float:
        return math.exp(self.log_eps2)

    @computed_field
    @property
    def c1(self) -> float:
        return math.exp(self.log_c1)

    @computed_field
    @property
    def delta_prime(self) -> float:
        return math.exp(self.log_delta_prime)

    def to_classification_params(self) -> ClassificationParams:
        return ClassificationParams(c1=self.c1, c2=self.c2, eps1=self.eps1, eps2=self.eps2, delta=self.delta)


class InequalityCheck(BaseModel):
    id: str
    lhs: float
    rhs: float
    holds: bool


class HcSchedule(BaseModel):
    """Sparsity levels a_k, b_k and mass splits d1_k, d2_k covering the highly compressible set."""

    n: float = Field(gt=0.0)
    delta: float = Field(gt=0.0, lt=1.0)
    c2: float = Field(gt=0.0)
    K: float = Field(gt=0.0)
    m: int = Field(ge=1)
    a: list[float]
    b: list[float]
    log_d1: list[float]
    log_d2: list[float]

    @computed_field
    @property
    def d1(self) -> list[float]:
        return np.exp(self.log_d1).tolist()

    @computed_field
    @property
    def d2(self) -> list[float]:
        return np.exp(self.log_d2).tolist()

    def violations(self) -> list[tuple[int, str]]:
        """(1-based index, constraint) for every schedule invariant that fails."""
        failed = []
        m = self.m
        d = Fraction(self.delta).limit_denominator(10**9)
        if not ((m - 1) * d / 2 < 1 - d <= m * d / 2):
            failed.append((m, "m is the largest integer with (m-1) delta/2 < 1 - delta"))
        if not (len(self.a) == len(self.b) == len(self.log_d1) == len(self.log_d2) == m):
            failed.append((m, "sequence lengths equal m"))
            return failed
        if not math.isclose(self.a[-1], self.c2 * self.n ** (1.0 - self.delta), rel_tol=1e-12):
            failed.append((m, "a_m = c2 n^(1-delta)"))
        if self.b[0] != 1.0:
            failed.append((1, "b_1 = 1"))
        for k in range(1, m):
            if self.b[k] != self.a[k - 1]:
                failed.append((k + 1, "b_k = a_(k-1)"))
        if not math.isclose(math.exp(self.log_d1[0]) + math.exp(self.log_d2[0]), 1.0, rel_tol=1e-12):
            failed.append((1, "d1_1 + d2_1 = 1"))
        for k in range(m - 1):
            if not math.isclose(self.log_d1[k], np.logaddexp(self.log_d1[k + 1], self.log_d2[k + 1]),
                                rel_tol=1e-12, abs_tol=1e-12):
                failed.append((k + 1, "d1_k = d1_(k+1) + d2_(k+1)"))
        for k in range(m):
            if not self.log_d2[k] > _log_hc_constraint(self.log_d1[k], self.c2, self.K):
                failed.append((k + 1, "d2_k > 57 sqrt(d1_k) + 320 e^c2 K^2 d1_k"))
        return failed


# --------------------------------------------------------------------------- #
# Small-ball and row bounds
# --------------------------------------------------------------------------- #

def complex_small_ball(eps: float, sigma2: float) -> tuple[float, float]:
    """
    P[|X| <= eps] for X ~ N_C(0, sigma2), exactly and as the bound eps^2/sigma2.

    2|X|^2/sigma2 is chi-squared with two degrees of freedom, so the exact
    value is 1 - exp(-eps^2/sigma2).
    """
    if sigma2 <= 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if eps < 0:
        raise ValueError(f"eps must be nonnegative, got {eps}")
    ratio = eps * eps / sigma2
    return float(-math.expm1(-ratio)), float(ratio)


def paley_zygmund_sparse_bound(a_vec, t: float, delta: float, n: int) -> float:
    """
    Upper bound on P[sum_i b_i <= n^(delta-1) t a] where b_i = a_i times a Bernoulli(n^(delta-1)) mask.

    Args:
        a_vec: Nonnegative weights, not all zero.
        t: Threshold fraction in [0, 1].
        delta: Sparsity exponent.
        n: Dimension.

    Returns:
        1 - (1-t)^2 a / (a + (n^(1-delta) - 1) max a_i) with a = sum a_i.
    """
    weights = np.asarray(a_vec, dtype=float)
    if np.any(weights < 0):
        raise ValueError("a_vec must be nonnegative")
    total = float(weights.sum())
    if total <= 0:
        raise ValueError("a_vec must not be all zero")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    spread = float(n) ** (1.0 - delta) - 1.0
    return 1.0 - (1.0 - t) ** 2 * total / (total + spread * float(weights.max()))


def dot_small_ball_bound(x, eps: float, t: float, delta: float, n: int) -> float:
    """Upper bound on P[|R_1 . x| <= eps] for a sparse row R_1, valid for 0 < t < 1."""
    x = np.asarray(x, dtype=np.complex128).ravel()
    sq = np.abs(x) ** 2
    norm2 = float(sq.sum())
    if norm2 <= 0:
        raise ValueError("x must be nonzero")
    if not 0.0 < t < 1.0:
        raise ValueError(f"t must lie in (0, 1), got {t}")
    spread = float(n) ** (1.0 - delta) - 1.0
    mask_term = 1.0 - (1.0 - t) ** 2 * norm2 / (norm2 + spread * float(sq.max()))
    gauss_term = eps * eps / (float(n) ** (delta - 1.0) * t * norm2)
    return mask_term + gauss_term


def _row_bound_base(j_size: int, m: int, delta: float, n: int) -> float:
    if j_size < 1 or m < 1:
        raise ValueError(f"j_size and m must be positive, got j_size={j_size}, m={m}")
    p = float(n) ** (delta - 1.0)
    return j_size * float(n) ** delta * (1.0 - p) ** (m - 1)


def row_bound_tail(j_size: int, m: int, delta: float, n: int) -> tuple[float, float]:
    """
    Chernoff lower tail for the number of rows with one large entry in J and zeros elsewhere on supp(y).

    Args:
        j_size: |J|.
        m: |supp(y)|.
        delta: Sparsity exponent.
        n: Dimension.

    Returns:
        (threshold, prob): P[|I_y(J)| <= threshold] <= prob.
    """
    base = _row_bound_base(j_size, m, delta, n)
    return 0.15 * base, math.exp(-0.0375 * base)


def row_hit_probability(j_size: int, m: int, delta: float, n: int,
                        field: ScalarField = ScalarField.COMPLEX) -> float:
    """Exact probability that a given row lies in I_y(J): c_g |J| p (1-p)^(m-1)."""
    base = _row_bound_base(j_size, m, delta, n)
    return c_g(field) * base / n


def norm_threshold(K: float, n: int, delta: float) -> float:
    return K * float(n) ** (delta / 2.0)


# --------------------------------------------------------------------------- #
# Highly compressible vectors: step bound and schedule
# --------------------------------------------------------------------------- #

def hc_step_size(b: float, d1: float, d2: float) -> int:
    """Block size s = 1 + floor((d2 - 57 sqrt(d1)) b / 8)."""
    return 1 + math.floor((d2 - NET_CONSTANT * math.sqrt(d1)) * b / 8.0)


def _log_hc_constraint(log_d1: float, c2: float, K: float) -> float:
    # log(57 sqrt(d1) + 320 e^c2 K^2 d1)
    return float(np.logaddexp(
        math.log(NET_CONSTANT) + 0.5 * log_d1,
        math.log(NORM_CONSTANT) + c2 + 2.0 * math.log(K) + log_d1,
    ))


def hc_step_bound(n: float, delta: float, a: float, b: float, d1: float, d2: float,
                  c2: float, K: float) -> float:
    """
    Log of the union bound for one piece V(a, b, d1, d2) of the highly compressible set.

    log n - s n^delta / (40 e^c2) + log |net|, with s from `hc_step_size`.

    Raises:
        ValueError: If a > c2 n^(1-delta) or the mass condition
            57 sqrt(d1) + 320 e^c2 K^2 d1 < d2 < 1 fails.
    """
    if a > c2 * n ** (1.0 - delta) * (1.0 + 1e-12):
        raise ValueError(f"need a <= c2 n^(1-delta), got a={a}")
    if not 0.0 < d1 or not math.exp(_log_hc_constraint(math.log(d1), c2, K)) < d2 < 1.0:
        raise ValueError(f"need 57 sqrt(d1) + 320 e^c2 K^2 d1 < d2 < 1, got d1={d1}, d2={d2}")
    s = hc_step_size(b, d1, d2)
    return math.log(n) - s * n ** delta / (40.0 * math.exp(c2)) + net_cardinality_bound(n, a, d1)


def schedule_length(delta: float) -> int:
    """Largest m with (m - 1) delta / 2 < 1 - delta, in exact rational arithmetic."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    d = Fraction(delta).limit_denominator(10**9)
    return math.ceil(2 * (1 - d) / d)


def _schedule_sizes(n: float, delta: float, c2: float, m: int) -> tuple[list[float], list[float]]:
    a = [float(n) ** (k * delta / 2.0) for k in range(1, m)] + [c2 * float(n) ** (1.0 - delta)]
    b = [1.0] + a[:-1]
    return a, b


def _schedule_masses(m: int, log_eps_total: float, c2: float, K: float,
                     slack: float) -> tuple[list[float], list[float], tuple[int, str] | None]:
    log_d1 = [0.0] * m
    log_d2 = [0.0] * m
    log_d1[m - 1] = log_eps_total
    log_slack = math.log(slack)
    for k in range(m - 1, 0, -1):
        log_d2[k] = log_slack + _log_hc_constraint(log_d1[k], c2, K)
        log_d1[k - 1] = float(np.logaddexp(log_d1[k], log_d2[k]))
    if log_d1[0] >= 0.0:
        return log_d1, log_d2, (1, "d1_1 < 1 so that d2_1 = 1 - d1_1 is positive")
    log_d2[0] = math.log(-math.expm1(log_d1[0]))
    if not log_d2[0] > _log_hc_constraint(log_d1[0], c2, K):
        return log_d1, log_d2, (1, "d2_k > 57 sqrt(d1_k) + 320 e^c2 K^2 d1_k")
    return log_d1, log_d2, None


def _bisect_log(predicate: Callable[[float], bool], start: float = -1.0, floor: float = -1e15,
                tol: float = None) -> float | None:
    """
    Largest log-value x <= start with predicate(x) true, for a predicate that
    only gets easier as x decreases. Returns None when nothing above `floor` passes.
    """
    tol = conf.BISECTION_TOL if tol is None else tol
    if predicate(start):
        return start
    bad, good = start, start
    step = 1.0
    while True:
        good = start - step
        if good < floor:
            return None
        if predicate(good):
            break
        bad = good
        step *= 2.0
    while bad - good > tol * max(1.0, abs(good)):
        mid = 0.5 * (good + bad)
        if predicate(mid):
            good = mid
        else:
            bad = mid
    return good


def max_schedule_budget(delta: float, c2: float, K: float, slack: float = None) -> float:
    """
    Log of the largest eps1 + eps2 for which the schedule recursion closes.

    Raises:
        InfeasibleScheduleError: If no budget above exp(-1e6) works.
    """
    slack = conf.SCHEDULE_SLACK if slack is None else slack
    m = schedule_length(delta)
    budget = _bisect_log(lambda log_eps: _schedule_masses(m, log_eps, c2, K, slack)[2] is None)
    if budget is None:
        raise InfeasibleScheduleError("no feasible schedule budget", 1, "d2_k > 57 sqrt(d1_k) + 320 e^c2 K^2 d1_k")
    return budget


def build_hc_schedule(n: float, delta: float, c2: float, K: float, eps1: float = None, eps2: float = None,
                      log_eps_total: float = None, slack: float = None) -> HcSchedule:
    """
    Builds the covering schedule of the highly compressible set.

    d1_m = eps1 + eps2, then backwards d2_k = slack * (57 sqrt(d1_k) + 320 e^c2 K^2 d1_k)
    and d1_(k-1) = d1_k + d2_k, closing with d2_1 = 1 - d1_1.

    Args:
        n: Dimension.
        delta: Sparsity exponent.
        c2: Partition constant.
        K: Operator norm constant.
        eps1: Partition constant (ignored when log_eps_total is given).
        eps2: Partition constant (ignored when log_eps_total is given).
        log_eps_total: log(eps1 + eps2), for budgets below double precision.
        slack: Factor over the mass constraint; defaults to config.SCHEDULE_SLACK.

    Returns:
        HcSchedule with every invariant verified.

    Raises:
        InfeasibleScheduleError: With the index and text of the first violated constraint.
    """
    slack = conf.SCHEDULE_SLACK if slack is None else slack
    if slack <= 1.0:
        raise ValueError(f"slack must exceed 1, got {slack}")
    if log_eps_total is None:
        if eps1 is None or eps2 is None or eps1 <= 0 or eps2 <= 0:
            raise ValueError("need positive eps1 and eps2, or log_eps_total")
        log_eps_total = math.log(eps1 + eps2)

    m = schedule_length(delta)
    a, b = _schedule_sizes(n, delta, c2, m)
    log_d1, log_d2, failure = _schedule_masses(m, log_eps_total, c2, K, slack)
    if failure is not None:
        index, constraint = failure
        raise InfeasibleScheduleError(f"schedule infeasible at k={index}: {constraint}", index, constraint)

    schedule = HcSchedule(n=n, delta=delta, c2=c2, K=K, m=m, a=a, b=b, log_d1=log_d1, log_d2=log_d2)
    failed = schedule.violations()
    if failed:
        index, constraint = failed[0]
        raise InfeasibleScheduleError(f"schedule invariant broken at k={index}: {constraint}", index, constraint)
    return schedule


# --------------------------------------------------------------------------- #
# Moderately compressible vectors: chronological constant selection
# --------------------------------------------------------------------------- #

def _denominator(c2: float, n_power: float) -> float:
    # 1 + 4/c2 - 4/(c2 n^(1-delta)) with the n-power supplied; inf gives the limit
    if math.isinf(n_power):
        return 1.0 + 4.0 / c2
    return 1.0 + 4.0 / c2 - 4.0 / (c2 * n_power)


def _entropy(log_x: float) -> float:
    # x (1 - ln x), vanishing at x = 0
    if math.isinf(log_x):
        return 0.0
    return math.exp(log_x) * (1.0 - log_x)


def _log_gap(log_eps1: float, log_eps2: float) -> float:
    # log(eps2 - 57 sqrt(eps1)), -inf when nonpositive
    ratio = math.exp(math.log(NET_CONSTANT) + 0.5 * log_eps1 - log_eps2)
    if ratio >= 1.0:
        return -math.inf
    return log_eps2 + math.log1p(-ratio)


class _Terms:
    """Both sides of every selection inequality for fixed constants and one value of n^(1-delta)."""

    def __init__(self, K, c2, t, log_eps1, log_eps2, log_c1, log_delta_prime, n_power):
        self.D = _denominator(c2, n_power)
        self.q = math.exp(log_eps2) / self.D
        self.K, self.t = K, t
        self.log_eps1, self.log_eps2 = log_eps1, log_eps2
        self.log_c1, self.log_dp = log_c1, log_delta_prime
        self.dp = math.exp(log_delta_prime)
        self.log_gap = _log_gap(log_eps1, log_eps2)

    def step3(self) -> tuple[float, float]:
        lhs = _entropy(self.log_dp) / (1.0 - self.dp) + math.log1p(-0.4 * self.q)
        return lhs, math.log1p(-0.3 * self.q)

    def _log_noise(self) -> float:
        # log(16 K^2 eps1 / (t (eps2 - 57 sqrt(eps1)) delta'))
        if self.t <= 0.0 or math.isinf(self.log_gap):
            return math.inf
        return math.log(16.0 * self.K ** 2) + self.log_eps1 - math.log(self.t) - self.log_gap - self.log_dp

    def step4(self) -> tuple[float, float]:
        # (1-t)^2 gap/D - 0.4 eps2/D > noise, written as log(noise) < log(margin)
        weight = (1.0 - self.t) ** 2
        gap = math.exp(self.log_gap) if not math.isinf(self.log_gap) else 0.0
        margin = (weight * gap - 0.4 * math.exp(self.log_eps2)) / self.D
        rhs = math.log(margin) if margin > 0 else -math.inf
        return self._log_noise(), rhs

    def _net_rate(self) -> float:
        # log(3/sqrt(eps1)) per unit of 2 c1 n
        return 2.0 * math.exp(self.log_c1) * (math.log(3.0) - 0.5 * self.log_eps1)

    def step5a(self) -> tuple[float, float]:
        lhs = self._net_rate() + (1.0 - self.dp) * math.log1p(-0.3 * self.q)
        return lhs, (1.0 - self.dp) * math.log1p(-0.2 * self.q)

    def step5b(self) -> tuple[float, float]:
        lhs = _entropy(self.log_c1) / (1.0 - self.dp) + math.log1p(-0.2 * self.q)
        return lhs, math.log1p(-0.1 * self.q)

    def product(self) -> float:
        noise = math.exp(self._log_noise()) if not math.isinf(self._log_noise()) else math.inf
        gap = math.exp(self.log_gap) if not math.isinf(self.log_gap) else 0.0
        shortfall = noise - (1.0 - self.t) ** 2 * gap / self.D
        return (self._net_rate() + _entropy(self.log_c1) + _entropy(self.log_dp)
                + (1.0 - self.dp) * math.log1p(shortfall))


def _n_power(n: float, delta: float) -> float:
    return math.inf if math.isinf(n) else float(n) ** (1.0 - delta)


def verify_mc_constants(c: McConstants, n: float) -> list[InequalityCheck]:
    """
    Evaluates every selection inequality at dimension n (math.inf for the limit).

    Steps 3, 4 and 5b compare natural logs of both sides; 5a compares
    per-dimension exponents. "product" is the per-dimension exponent of the
    full union bound and holds when negative. Degenerate inputs (t = 0) give
    infinite sides instead of raising.
    """
    terms = _Terms(c.K, c.c2, c.t, c.log_eps1, c.log_eps2, c.log_c1, c.log_delta_prime,
                   _n_power(n, c.delta))
    log_total = float(np.logaddexp(c.log_eps1, c.log_eps2))
    checks = [
        InequalityCheck(id="1", lhs=(1.0 - c.t) ** 2, rhs=0.5, holds=abs((1.0 - c.t) ** 2 - 0.5) <= 1e-12),
        InequalityCheck(id="2", lhs=log_total, rhs=c.log_schedule_budget,
                        holds=log_total <= c.log_schedule_budget and c.log_eps1 < c.log_eps2),
    ]
    for step_id, (lhs, rhs) in (("3", terms.step3()), ("4", terms.step4()),
                                ("5a", terms.step5a()), ("5b", terms.step5b())):
        checks.append(InequalityCheck(id=step_id, lhs=lhs, rhs=rhs, holds=bool(lhs < rhs)))
    exponent = terms.product()
    checks.append(InequalityCheck(id="product", lhs=exponent, rhs=0.0, holds=bool(exponent < 0.0)))
    return checks


def choose_mc_constants(K: float, delta: float, n_min: float, c2: float = None) -> McConstants:
    """
    Picks t, eps2, delta', eps1 and c1 in that order.

    Every predicate is checked at n_min and at the n -> infinity limit, which is
    the harder of the two for all steps, so the result holds for every n >= n_min.

    Args:
        K: Operator norm constant.
        delta: Sparsity exponent.
        n_min: Smallest dimension the constants must serve; needs n_min^(1-delta) >= 2.
        c2: Partition constant, config.DEFAULT_C2 when omitted.

    Returns:
        McConstants that pass `verify_mc_constants` at n_min and in the limit.

    Raises:
        InfeasibleConstantsError: With the index of the step that could not be met.
    """
    if K <= 0:
        raise ValueError(f"K must be positive, got {K}")
    if float(n_min) ** (1.0 - delta) < 2.0:
        raise ValueError(f"n_min^(1-delta) must be at least 2, got {float(n_min) ** (1.0 - delta)}")

    # step 1
    c2 = conf.DEFAULT_C2 if c2 is None else c2
    t = 1.0 - 1.0 / math.sqrt(2.0)

    # step 2: eps1 < eps2 keeps eps1 + eps2 under the schedule budget
    try:
        log_budget = max_schedule_budget(delta, c2, K)
    except InfeasibleScheduleError as e:
        raise InfeasibleConstantsError(str(e), 2) from e
    log_eps2 = log_budget - math.log(2.0) - 1e-3

    powers = (_n_power(n_min, delta), math.inf)

    def terms(log_eps1=-math.inf, log_c1=-math.inf, log_dp=-1.0):
        return [_Terms(K, c2, t, log_eps1, log_eps2, log_c1, log_dp, power) for power in powers]

    def holds(pairs) -> bool:
        return all(lhs < rhs for lhs, rhs in pairs)

    # step 3
    log_dp = _bisect_log(lambda x: holds(term.step3() for term in terms(log_dp=x)))
    if log_dp is None:
        raise InfeasibleConstantsError("no delta' satisfies the entropy inequality", 3)

    # step 4
    def step4_ok(x: float) -> bool:
        return x < log_eps2 and holds(term.step4() for term in terms(log_eps1=x, log_dp=log_dp))

    log_eps1 = _bisect_log(step4_ok, start=log_eps2 - 1.0)
    if log_eps1 is None:
        raise InfeasibleConstantsError("no eps1 satisfies the small-ball inequality", 4)

    # step 5
    def step5_ok(x: float) -> bool:
        current = terms(log_eps1=log_eps1, log_c1=x, log_dp=log_dp)
        return holds(term.step5a() for term in current) and holds(term.step5b() for term in current)

    log_c1 = _bisect_log(step5_ok)
    if log_c1 is None:
        raise InfeasibleConstantsError("no c1 satisfies the net inequalities", 5)

    constants = McConstants(K=K, delta=delta, c2=c2, t=t, log_eps1=log_eps1, log_eps2=log_eps2,
                            log_c1=log_c1, log_delta_prime=log_dp, log_schedule_budget=log_budget)
    for n in (n_min, math.inf):
        for check in verify_mc_constants(constants, n):
            if not check.holds:
                step = int(check.id[0]) if check.id[0].isdigit() else 5
                raise InfeasibleConstantsError(f"inequality {check.id} fails at n={n}", step)
    return constants


# --------------------------------------------------------------------------- #
# Incompressible vectors, tail bounds and the shift construction
# --------------------------------------------------------------------------- #

def incompressible_witness(params: ClassificationParams) -> IncompWitness:
    """
    lambda1 = 2/eps1 and lambda0 = eps1 c1 / 2.

    Coordinates below eps1/(2n) carry less than eps1/2 of the mass, so an IC
    vector keeps at least eps1/2 of mass in [eps1/(2n), 1/(c1 n)], spread over
    at least (eps1/2) c1 n coordinates.
    """
    return IncompWitness(lambda0=params.eps1 * params.c1 / 2.0, lambda1=2.0 / params.eps1)


def count_heavy_coordinates(eta, witness: IncompWitness) -> int:
    """Number of i with |eta_i|^2 >= 1/(lambda1 n)."""
    eta = np.asarray(eta, dtype=np.complex128).ravel()
    return int(np.count_nonzero(np.abs(eta) ** 2 >= 1.0 / (witness.lambda1 * eta.shape[0])))


def ic_tail_bound(t: float, n: int, delta: float, witness: IncompWitness) -> float:
    """exp(-lambda0 n^delta / 8) + (2 lambda1 / lambda0) t^2 n^(1-delta)."""
    return (math.exp(-witness.lambda0 * float(n) ** delta / 8.0)
            + 2.0 * witness.lambda1 / witness.lambda0 * t * t * float(n) ** (1.0 - delta))


def theorem_tail_bounds(eps: float, n: int, delta: float, c: float, C: float) -> TailBounds:
    """The Ginibre tails and the two sparse tails, with caller-supplied constants c and C."""
    decay = math.exp(-c * float(n) ** delta)
    return TailBounds(
        ginibre_real=eps * n,
        ginibre_complex=(eps * n) ** 2,
        ru_specialized=decay + C * eps * float(n) ** ((2.0 - delta) / 2.0),
        main=decay + C * eps * eps * float(n) ** (2.0 - delta),
    )


def shift_bound_constant(variance: float, zero_probability: float, failure_share: float = None) -> float:
    """
    C = C'^2 from the two Markov steps on the Hilbert-Schmidt norms.

    Each of ||A_block||_HS >= C' n and ||a_col|| >= C' sqrt(n) has probability at
    most variance / C'^2, and the pair may fail with probability
    failure_share * P, so C'^2 = variance / (failure_share / 2 * P).
    """
    failure_share = conf.SHIFT_FAILURE_SHARE if failure_share is None else failure_share
    if variance <= 0 or not 0.0 < zero_probability <= 1.0 or failure_share <= 0:
        raise ValueError("need variance > 0, 0 < zero_probability <= 1 and failure_share > 0")
    return variance / (failure_share / 2.0 * zero_probability)
