"""
The lab's subcommands. Each one runs an experiment or evaluates a bound and
returns a `CommandResult`: a table for data.csv and a summary for summary.json.
"""

import math
from typing import Any, Literal

import numpy as np
from pydantic import BaseModel

from svtail.bounds import (
    build_hc_schedule,
    choose_mc_constants,
    hc_step_bound,
    hc_step_size,
    max_schedule_budget,
    theorem_tail_bounds,
    verify_mc_constants,
)
from svtail.ensemble import EnsembleSpec, ScalarField
from svtail.experiments import (
    distance_reduction_check,
    estimate_tail_curve,
    incompressible_prefactor_scan,
    incompressible_tail_experiment,
    net_check_experiment,
    norm_concentration,
    row_bound_experiment,
    shift_experiment,
)
from svtail.sphere import ClassificationParams

from .command import cmd

FieldName = Literal["complex", "real"]


class CommandResult(BaseModel):
    headers: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any]


def _log_grid(lo: float, hi: float, points: int) -> list[float]:
    if not 0.0 < lo < hi:
        raise ValueError(f"grid needs 0 < min < max, got {lo}, {hi}")
    if points < 2:
        raise ValueError(f"grid needs at least 2 points, got {points}")
    return np.logspace(math.log10(lo), math.log10(hi), points).tolist()


def _within(value: float, target: float, std_error: float, k: float = 3.0) -> bool:
    return abs(value - target) <= k * std_error


@cmd(["tail"], "Tail of the least singular value: P[sigma_n(A) <= eps] with its fitted exponent.")
def tail_command(n: int = 100, delta: float = 0.5, field: FieldName = "complex", trials: int = 10000,
                 eps_min: float = 1e-3, eps_max: float = 1e-1, eps_points: int = 25,
                 c: float = 1.0, C: float = 1.0, *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Matrix dimension.
        delta: Sparsity exponent, entries are nonzero with probability n^(delta-1).
        field: Scalar field of the Gaussian entries.
        trials: Number of sampled matrices (at least 100).
        eps_min: Smallest threshold of the log-spaced grid.
        eps_max: Largest threshold of the log-spaced grid.
        eps_points: Number of grid points.
        c: Decay constant used when the analytic tails are evaluated on the grid.
        C: Prefactor constant used when the analytic tails are evaluated on the grid.
    """
    spec = EnsembleSpec(n=n, delta=delta, field=ScalarField(field))
    curve = estimate_tail_curve(spec, _log_grid(eps_min, eps_max, eps_points), trials, master_seed, jobs)
    headers, rows = curve.table()
    bounds = [{"eps": eps, **theorem_tail_bounds(eps, n, delta, c, C).model_dump()} for eps in curve.eps_grid]
    summary = {
        "n": n,
        "delta": delta,
        "field": field,
        "trials": trials,
        "fitted_exponent": curve.fitted_exponent,
        "fit_r2": curve.fit_r2,
        "fit_points": curve.fit_points,
        "zero_success_eps": curve.zero_success_eps,
        "bounds": bounds,
    }
    return CommandResult(headers=headers, rows=rows, summary=summary)


@cmd(["norm"], "Operator norm concentration and the real/imaginary split of the norm.")
def norm_command(n: int = 100, delta: float = 0.5, field: FieldName = "complex", trials: int = 1000,
                 K_grid: list[float] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0], *, master_seed: int = 0,
                 jobs: int = None) -> CommandResult:
    """
    Args:
        n: Matrix dimension.
        delta: Sparsity exponent.
        field: Scalar field of the Gaussian entries.
        trials: Number of sampled matrices (at least 100).
        K_grid: Increasing constants K; exceedance means ||A||_op >= K n^(delta/2).
    """
    if any(b <= a for a, b in zip(K_grid, K_grid[1:])):
        raise ValueError("K_grid must be strictly increasing")
    report = norm_concentration(EnsembleSpec(n=n, delta=delta, field=ScalarField(field)), K_grid,
                                trials, master_seed, jobs)
    headers, rows = report.table()
    summary = {
        "n": n,
        "delta": delta,
        "trials": trials,
        "median_scaled_norm": report.median_scaled_norm,
        "split_holds": report.split_holds,
        "max_split_excess": report.max_split_excess,
        "frequency_nonincreasing": bool(np.all(np.diff(report.frequency) <= 0)),
    }
    return CommandResult(headers=headers, rows=rows, summary=summary)


@cmd(["rowbound"], "Rows with a single large entry on the support: mean count and Chernoff lower tail.")
def rowbound_command(n: int = 64, delta: float = 0.5, m: int = 4, j_size: int = 2, trials: int = 2000,
                     field: FieldName = "complex", *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Matrix dimension.
        delta: Sparsity exponent.
        m: Support size of the test vector y.
        j_size: Size of the column set J inside the support.
        trials: Number of sampled matrices.
        field: Scalar field of the Gaussian entries.
    """
    report = row_bound_experiment(n, delta, m, j_size, trials, master_seed, ScalarField(field), jobs)
    headers, rows = report.table()
    tail_se = math.sqrt(max(report.chernoff_bound * (1.0 - report.chernoff_bound), 1.0 / trials) / trials)
    summary = {
        **report.model_dump(),
        "mean_within_3se": _within(report.mean_count, report.expected_mean, report.std_error),
        "lower_tail_dominated": report.lower_tail_frequency <= report.chernoff_bound + 3.0 * tail_se,
    }
    return CommandResult(headers=headers, rows=rows, summary=summary)


@cmd(["net-check"], "Net approximation of the set V(a, b, d1, d2) on random members, with certificate checks.")
def net_check_command(n: int = 64, a: float = 16.0, b: float = 4.0, d1: float = 1e-5, d2: float = 0.5,
                      samples: int = 1000, *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Vector dimension.
        a: Coordinates with squared modulus at most 1/a count as small.
        b: Band upper edge is 1/b.
        d1: Bound on the small mass.
        d2: Lower bound on the band mass.
        samples: Number of random members of V.
    """
    report = net_check_experiment(n, a, b, d1, d2, samples, master_seed)
    headers, rows = report.table()
    return CommandResult(headers=headers, rows=rows, summary=report.model_dump())


@cmd(["constants"], "Chronological choice of the moderately compressible constants, verified on an n-grid.")
def constants_command(K: float = 6.0, delta: float = 0.5, n_min: float = 1000.0, c2: float = None,
                      n_max: float = 1e8, *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        K: Operator norm constant.
        delta: Sparsity exponent.
        n_min: Smallest dimension the constants must serve.
        c2: Partition constant (config default when omitted).
        n_max: Largest finite dimension of the verification grid.
    """
    constants = choose_mc_constants(K, delta, n_min, c2)
    grid = [float(n_min)]
    power = math.floor(math.log10(n_min)) + 1
    while 10.0 ** power <= n_max:
        grid.append(10.0 ** power)
        power += 1
    grid.append(math.inf)

    rows = []
    all_hold = True
    for n in grid:
        for check in verify_mc_constants(constants, n):
            rows.append([n, check.id, check.lhs, check.rhs, check.holds])
            all_hold = all_hold and check.holds
    summary = {"constants": constants.model_dump(), "n_grid": grid, "all_hold": all_hold}
    return CommandResult(headers=["n", "id", "lhs", "rhs", "holds"], rows=rows, summary=summary)


@cmd(["schedule"], "Sparsity and mass schedule covering the highly compressible vectors.")
def schedule_command(n: float = 1e6, delta: float = 0.5, K: float = 6.0, c2: float = 1.0,
                     log_eps_total: float = None, *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Dimension.
        delta: Sparsity exponent.
        K: Operator norm constant.
        c2: Partition constant.
        log_eps_total: Natural log of eps1 + eps2; the largest feasible budget when omitted.
    """
    budget = max_schedule_budget(delta, c2, K)
    log_total = budget if log_eps_total is None else log_eps_total
    schedule = build_hc_schedule(n, delta, c2, K, log_eps_total=log_total)

    rows = []
    for k in range(schedule.m):
        d1, d2 = schedule.d1[k], schedule.d2[k]
        step, log_bound = None, None
        if d1 > 0.0:
            step = hc_step_size(schedule.b[k], d1, d2)
            try:
                log_bound = hc_step_bound(n, delta, schedule.a[k], schedule.b[k], d1, d2, c2, K)
            except ValueError:
                log_bound = None
        rows.append([k + 1, schedule.a[k], schedule.b[k], schedule.log_d1[k], schedule.log_d2[k], step, log_bound])
    summary = {
        "m": schedule.m,
        "log_eps_total": log_total,
        "max_log_budget": budget,
        "violations": [f"k={index}: {constraint}" for index, constraint in schedule.violations()],
    }
    headers = ["k", "a", "b", "log_d1", "log_d2", "step_size", "log_step_bound"]
    return CommandResult(headers=headers, rows=rows, summary=summary)


@cmd(["incompressible"], "Small-ball tail of <Y_1, eta> for incompressible eta, with its n^(1-delta) prefactor.")
def incompressible_command(n: int = 100, delta: float = 0.5, field: FieldName = "complex", trials: int = 5000,
                           t_min: float = 1e-3, t_max: float = 1e-1, t_points: int = 9,
                           c1: float = 0.5, c2: float = 1.0, eps1: float = 0.1, eps2: float = 0.2,
                           n_grid: list[int] = None, *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Dimension.
        delta: Sparsity exponent.
        field: Scalar field of the Gaussian entries.
        trials: Number of (eta, Y_1) draws per dimension.
        t_min: Smallest threshold of the log-spaced grid.
        t_max: Largest threshold of the log-spaced grid.
        t_points: Number of grid points.
        c1: Partition constant for the small band.
        c2: Partition constant for the low band.
        eps1: Mass constant of the incompressible set.
        eps2: Mass constant of the moderately compressible set.
        n_grid: Dimensions for the prefactor scan at t_max; skipped when omitted.
    """
    params = ClassificationParams(c1=c1, c2=c2, eps1=eps1, eps2=eps2, delta=delta)
    report = incompressible_tail_experiment(params, n, delta, _log_grid(t_min, t_max, t_points), trials,
                                            master_seed, ScalarField(field), jobs)
    headers, rows = report.table()
    summary = report.model_dump()
    if n_grid:
        scan = incompressible_prefactor_scan(params, n_grid, delta, t_max, trials, master_seed,
                                             ScalarField(field), jobs)
        summary["prefactor_scan"] = scan.model_dump()
    return CommandResult(headers=headers, rows=rows, summary=summary)


@cmd(["distance"], "Reduction of sigma_n to distances between a column and the span of the others.")
def distance_command(n: int = 50, delta: float = 0.5, field: FieldName = "complex", trials: int = 1000,
                     *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Matrix dimension (at least 3).
        delta: Sparsity exponent.
        field: Scalar field of the Gaussian entries.
        trials: Number of sampled matrices.
    """
    report = distance_reduction_check(EnsembleSpec(n=n, delta=delta, field=ScalarField(field)),
                                      trials, master_seed, jobs=jobs)
    headers, rows = report.table()
    return CommandResult(headers=headers, rows=rows, summary=report.model_dump())


@cmd(["shift"], "Shifted matrix t*Id with a zeroed corner plus lam*A: the bound on sigma_n is shift dependent.",
     flags={"lam": "lambda"})
def shift_command(n: int = 50, t: float = 100.0, lam: float = 0.1, delta: float = 0.5, trials: int = 1000,
                  *, master_seed: int = 0, jobs: int = None) -> CommandResult:
    """
    Args:
        n: Matrix dimension.
        t: Diagonal value of the shift.
        lam: Scale of the sparse perturbation.
        delta: Sparsity exponent of the perturbation.
        trials: Number of sampled perturbations.
    """
    report = shift_experiment(n, t, lam, EnsembleSpec(n=n, delta=delta), trials, master_seed, jobs)
    headers, rows = report.table()
    summary = {
        **report.model_dump(),
        "shift_dependent": report.median_sigma_min < report.median_unshifted_sigma_min,
    }
    return CommandResult(headers=headers, rows=rows, summary=summary)


COMMANDS = [
    tail_command,
    norm_command,
    rowbound_command,
    net_check_command,
    constants_command,
    schedule_command,
    incompressible_command,
    distance_command,
    shift_command,
]
