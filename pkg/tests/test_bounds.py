import math

import numpy as np
import pytest
from pydantic import ValidationError

from svtail.bounds import (
    C_G_COMPLEX,
    C_G_REAL,
    McConstants,
    build_hc_schedule,
    c_g,
    choose_mc_constants,
    complex_small_ball,
    count_heavy_coordinates,
    dot_small_ball_bound,
    hc_step_bound,
    hc_step_size,
    ic_tail_bound,
    incompressible_witness,
    max_schedule_budget,
    norm_threshold,
    paley_zygmund_sparse_bound,
    row_bound_tail,
    row_hit_probability,
    schedule_length,
    shift_bound_constant,
    theorem_tail_bounds,
    verify_mc_constants,
)
from svtail.ensemble import ScalarField
from svtail.errors import InfeasibleConstantsError, InfeasibleScheduleError
from svtail.sphere import ClassificationParams


def test_complex_small_ball():
    exact, bound = complex_small_ball(0.1, 1.0)
    assert exact == pytest.approx(1.0 - math.exp(-0.01))
    assert bound == pytest.approx(0.01)
    assert exact <= bound
    exact, bound = complex_small_ball(0.3, 2.0)
    assert bound == pytest.approx(0.045)
    with pytest.raises(ValueError):
        complex_small_ball(0.1, 0.0)


def test_paley_zygmund_sparse_bound():
    value = paley_zygmund_sparse_bound(np.ones(10), 0.5, 0.5, 100)
    assert value == pytest.approx(1.0 - 0.25 * 10.0 / 19.0)
    assert 0.0 <= value <= 1.0
    with pytest.raises(ValueError):
        paley_zygmund_sparse_bound(np.zeros(3), 0.5, 0.5, 100)
    with pytest.raises(ValueError):
        paley_zygmund_sparse_bound(np.ones(3), 1.5, 0.5, 100)


def test_dot_small_ball_bound():
    x = np.full(100, 0.1)
    value = dot_small_ball_bound(x, 0.01, 0.5, 0.5, 100)
    mask_term = 1.0 - 0.25 * 1.0 / (1.0 + 9.0 * 0.01)
    gauss_term = 1e-4 / (0.1 * 0.5 * 1.0)
    assert value == pytest.approx(mask_term + gauss_term)
    with pytest.raises(ValueError):
        dot_small_ball_bound(x, 0.01, 1.0, 0.5, 100)


def test_row_bounds():
    base = 2 * 8.0 * (1.0 - 1.0 / 8.0) ** 3
    threshold, prob = row_bound_tail(2, 4, 0.5, 64)
    assert threshold == pytest.approx(0.15 * base)
    assert prob == pytest.approx(math.exp(-0.0375 * base))
    assert row_hit_probability(2, 4, 0.5, 64) == pytest.approx(math.exp(-1) * base / 64)
    with pytest.raises(ValueError):
        row_bound_tail(0, 4, 0.5, 64)


def test_c_g_constants():
    assert c_g(ScalarField.COMPLEX) == pytest.approx(C_G_COMPLEX)
    assert c_g(ScalarField.REAL) == pytest.approx(0.3173105, abs=1e-6)
    assert C_G_REAL < C_G_COMPLEX


def test_norm_threshold():
    assert norm_threshold(6.0, 100, 0.5) == pytest.approx(6.0 * math.sqrt(10.0))


def test_hc_step():
    assert hc_step_size(1000.0, 1e-6, 0.5) == 56
    value = hc_step_bound(1e12, 0.5, 1000.0, 1000.0, 1e-6, 0.5, 1.0, 6.0)
    net = 2000.0 * math.log(3.0 / 1e-3) + 1000.0 * (1.0 + math.log(1e9))
    expected = math.log(1e12) - 56 * 1e6 / (40.0 * math.e) + net
    assert value == pytest.approx(expected)
    assert value < -4e5


def test_hc_step_bound_rejects_bad_inputs():
    with pytest.raises(ValueError):
        hc_step_bound(1e4, 0.5, 1000.0, 10.0, 1e-6, 0.5, 1.0, 6.0)
    with pytest.raises(ValueError):
        hc_step_bound(1e12, 0.5, 1000.0, 1000.0, 1e-2, 0.5, 1.0, 6.0)


@pytest.mark.parametrize("delta, m", [(0.5, 2), (0.2, 8), (0.7, 1), (0.1, 18), (1.0 / 3.0, 4), (0.9, 1)])
def test_schedule_length(delta, m):
    assert schedule_length(delta) == m


@pytest.mark.parametrize("delta", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
def test_schedule_satisfies_invariants(delta):
    budget = max_schedule_budget(delta, 1.0, 6.0)
    assert budget < 0
    schedule = build_hc_schedule(1e6, delta, 1.0, 6.0, log_eps_total=budget - 1.0)
    assert schedule.violations() == []
    assert schedule.m == schedule_length(delta)
    assert schedule.b[0] == 1.0
    assert schedule.a[-1] == pytest.approx(1e6 ** (1.0 - delta))
    assert schedule.log_d1[-1] == pytest.approx(budget - 1.0)


def test_schedule_budget_is_tight():
    budget = max_schedule_budget(0.5, 1.0, 6.0)
    with pytest.raises(InfeasibleScheduleError):
        build_hc_schedule(1e6, 0.5, 1.0, 6.0, log_eps_total=budget + 1.0)


def test_schedule_infeasible_masses():
    with pytest.raises(InfeasibleScheduleError) as e:
        build_hc_schedule(1e6, 0.5, 1.0, 6.0, eps1=0.3, eps2=0.3)
    assert e.value.index == 1


def test_schedule_violations_detect_tampering():
    schedule = build_hc_schedule(1e6, 0.5, 1.0, 6.0, log_eps_total=max_schedule_budget(0.5, 1.0, 6.0) - 1.0)
    broken = schedule.model_copy(update={"b": [2.0] + schedule.b[1:]})
    assert (1, "b_1 = 1") in broken.violations()


def test_schedule_needs_masses():
    with pytest.raises(ValueError):
        build_hc_schedule(1e6, 0.5, 1.0, 6.0)


@pytest.mark.parametrize("delta", [0.3, 0.5, 0.7])
def test_mc_constants_verify_on_n_grid(delta):
    constants = choose_mc_constants(6.0, delta, 1000)
    assert constants.log_eps1 < constants.log_eps2
    assert np.logaddexp(constants.log_eps1, constants.log_eps2) <= constants.log_schedule_budget
    assert (1.0 - constants.t) ** 2 == pytest.approx(0.5)
    for n in [1e3, 1e4, 1e5, 1e6, 1e7, 1e8, math.inf]:
        checks = verify_mc_constants(constants, n)
        assert [c.id for c in checks] == ["1", "2", "3", "4", "5a", "5b", "product"]
        assert all(c.holds for c in checks), [c for c in checks if not c.holds]


def test_mc_constants_are_tight_in_eps1():
    constants = choose_mc_constants(6.0, 0.5, 1000)
    doubled = constants.model_copy(update={"log_eps1": constants.log_eps1 + math.log(2.0)})
    verdicts = [c.holds for n in (1e3, math.inf) for c in verify_mc_constants(doubled, n)]
    assert not all(verdicts)


def test_mc_constants_degenerate_t():
    constants = choose_mc_constants(6.0, 0.5, 1000)
    checks = {c.id: c for c in verify_mc_constants(constants.model_copy(update={"t": 0.0}), 1e4)}
    assert not checks["1"].holds
    assert not checks["product"].holds


def test_mc_constants_model_checks_t():
    with pytest.raises(ValidationError):
        McConstants(K=6.0, delta=0.5, c2=1.0, t=0.1, log_eps1=-50.0, log_eps2=-30.0, log_c1=-40.0,
                    log_delta_prime=-30.0, log_schedule_budget=-29.0)


def test_mc_constants_reject_small_n_min():
    with pytest.raises(ValueError):
        choose_mc_constants(6.0, 0.5, 2)


def test_infeasible_constants_error_names_step():
    error = InfeasibleConstantsError("no eps1 satisfies the small-ball inequality", 4)
    assert error.step == 4
    assert str(error).startswith("step 4: ")


def test_mc_constants_to_classification_params():
    constants = choose_mc_constants(6.0, 0.5, 1000)
    params = constants.to_classification_params()
    assert params.eps1 == pytest.approx(constants.eps1)
    assert params.delta == 0.5


def test_incompressible_witness():
    params = ClassificationParams(c1=0.5, c2=1.0, eps1=0.1, eps2=0.2, delta=0.5)
    witness = incompressible_witness(params)
    assert witness.lambda0 == pytest.approx(0.025)
    assert witness.lambda1 == pytest.approx(20.0)
    assert count_heavy_coordinates(np.full(100, 0.1), witness) == 100
    expected = math.exp(-0.025 * 10.0 / 8.0) + 2 * 20.0 / 0.025 * 1e-4 * 10.0
    assert ic_tail_bound(0.01, 100, 0.5, witness) == pytest.approx(expected)


def test_theorem_tail_bounds():
    bounds = theorem_tail_bounds(0.01, 100, 0.5, 1.0, 1.0)
    assert bounds.ginibre_real == pytest.approx(1.0)
    assert bounds.ginibre_complex == pytest.approx(1.0)
    assert bounds.main == pytest.approx(math.exp(-10.0) + 1e-4 * 100 ** 1.5)
    assert bounds.ru_specialized == pytest.approx(math.exp(-10.0) + 0.01 * 100 ** 0.75)


def test_shift_bound_constant():
    p = 50 ** -0.5
    assert shift_bound_constant(p, 1.0 - p, 0.01) == pytest.approx(p / (0.005 * (1.0 - p)))
    with pytest.raises(ValueError):
        shift_bound_constant(0.0, 0.5)
