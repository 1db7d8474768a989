"""Windowing, transition readout, and the adaptive kernel's contracts."""

import dataclasses
import math

import numpy as np
import pytest
from scipy.integrate import quad

from lzdec import (
    InitialCondition,
    InvalidInputError,
    InvalidProfileError,
    FullState,
    LinearBias,
    ModelParams,
    NonConvergenceError,
    PiecewiseLinearBias,
    ReducedState,
    SimConfig,
    SinusoidalBias,
    TabulatedBias,
    apply_relaxation_envelope,
    auto_window,
    integrate,
    integrate_full,
    landau_zener_xinf,
)

FAST = SimConfig(window_doubling=False)


# ---------------------------------------------------------------------------
# automatic window
# ---------------------------------------------------------------------------


def test_window_at_unit_scales():
    w = auto_window(ModelParams(delta1_r=1.0), LinearBias(1.0))
    assert w == (-40.0, 40.0)


def test_window_fast_sweep_uses_phase_scale():
    # For v >> delta1^2 the crossing is narrow and 1/sqrt(v) dominates.
    w = auto_window(ModelParams(delta1_r=0.0), LinearBias(4.0))
    assert w == (-20.0, 20.0)


def test_window_slow_sweep_uses_crossing_scale():
    w = auto_window(ModelParams(delta1_r=2.0), LinearBias(0.5))
    assert w == (-160.0, 160.0)


def test_window_does_not_grow_with_dephasing():
    # Wing decay outside the window is folded in analytically, so the
    # window is deliberately independent of gamma_d.
    a = auto_window(ModelParams(delta1_r=1.0, gamma_d=0.0), LinearBias(1.0))
    b = auto_window(ModelParams(delta1_r=1.0, gamma_d=1e3), LinearBias(1.0))
    assert a == b


def test_window_cap():
    cfg = SimConfig(window_factor=40.0, window_cap_factor=15.0)
    w = auto_window(ModelParams(delta1_r=1.0), LinearBias(1.0), cfg)
    assert w == (-15.0, 15.0)


def test_window_rejects_profiles_without_horizon():
    with pytest.raises(InvalidProfileError):
        auto_window(ModelParams(delta1_r=1.0), SinusoidalBias(1.0, 1.0))


# ---------------------------------------------------------------------------
# transition readout against closed forms
# ---------------------------------------------------------------------------


def test_fast_sweep_matches_coherent_formula():
    result = integrate(ModelParams(delta1_r=1.0), LinearBias(10.0))
    assert abs(result.x_inf - 0.708) < 2e-3
    assert abs(result.x_inf - landau_zener_xinf(1.0, 10.0)) < 1e-3
    assert result.x_inf_uncertainty >= 0.0
    assert abs(result.x_inf - landau_zener_xinf(1.0, 10.0)) < max(
        result.x_inf_uncertainty, 1e-5
    ) * 50  # uncertainty is an honest scale, not an exact bound


def test_zero_gap_is_exact():
    result = integrate(ModelParams(delta1_r=0.0, gamma_d=2.0), LinearBias(1.0))
    assert result.x_inf == 1.0
    assert result.x_inf_uncertainty == 0.0
    assert result.final_norm == 0.25


def test_strong_dephasing_matches_rate_equation_quadrature():
    total, _ = quad(lambda t: 100.0 / (100.0**2 + t**2), -np.inf, np.inf)
    oracle = math.exp(-total)
    result = integrate(ModelParams(delta1_r=1.0, gamma_d=100.0), LinearBias(1.0))
    assert result.x_inf == pytest.approx(oracle, rel=1e-2)


@pytest.mark.parametrize("v", [0.5, 2.0, 10.0])
def test_doubling_uncertainty_is_small_and_nonnegative(v):
    result = integrate(ModelParams(delta1_r=1.0, gamma_d=0.3), LinearBias(v))
    assert 0.0 <= result.x_inf_uncertainty < 1e-3


def test_uncertainty_nan_when_doubling_disabled():
    result = integrate(ModelParams(delta1_r=1.0, gamma_d=0.3), LinearBias(1.0), config=FAST)
    assert math.isnan(result.x_inf_uncertainty)


def test_population_difference_stays_physical():
    for gamma in (0.0, 0.5, 20.0):
        r = integrate(ModelParams(delta1_r=1.5, gamma_d=gamma), LinearBias(0.7), config=FAST)
        assert abs(r.x_inf) <= 1.0 + 10.0 * FAST.rtol


# ---------------------------------------------------------------------------
# determinism and tolerance behaviour
# ---------------------------------------------------------------------------


def test_runs_are_bit_reproducible():
    params = ModelParams(delta1_r=1.0, gamma_d=0.3)
    a = integrate(params, LinearBias(2.0))
    b = integrate(params, LinearBias(2.0))
    assert a.x_inf == b.x_inf
    assert a.final_norm == b.final_norm
    assert a.n_steps == b.n_steps


@pytest.mark.parametrize("v", [0.5, 2.0])
@pytest.mark.parametrize("rtol_loose,rtol_tight", [(1e-5, 5e-6), (1e-7, 5e-8), (1e-9, 5e-10)])
def test_halving_rtol_never_doubles_the_error(v, rtol_loose, rtol_tight):
    ref = landau_zener_xinf(1.0, v)
    errs = {}
    for rt in (rtol_loose, rtol_tight):
        cfg = SimConfig(rtol=rt, atol=rt * 1e-3)
        errs[rt] = abs(integrate(ModelParams(delta1_r=1.0), LinearBias(v), config=cfg).x_inf - ref)
    # allow an absolute floor: below ~1e-9 the window truncation dominates
    assert errs[rtol_tight] <= max(2.0 * errs[rtol_loose], 5e-9)


# ---------------------------------------------------------------------------
# norm audit and trajectory emission
# ---------------------------------------------------------------------------


def test_norm_never_increases_beyond_tolerance_slack():
    cfg = dataclasses.replace(FAST, emit_trajectory=True, debug_norm_check=True)
    r = integrate(ModelParams(delta1_r=1.2, gamma_d=0.8), LinearBias(0.9), config=cfg)
    slack = 50.0 * (cfg.atol + cfg.rtol * 0.25)
    assert r.max_norm_increase <= slack
    tr = r.trajectory
    norms = 0.25 * tr[:, 1] ** 2 + tr[:, 2] ** 2 + tr[:, 3] ** 2
    assert np.max(np.diff(norms)) <= slack
    assert np.all(np.diff(tr[:, 0]) > 0)
    assert tr[0, 0] == r.t_window[0]
    assert tr[-1, 0] == r.t_window[1]


def test_conservative_run_keeps_unit_norm():
    cfg = SimConfig(rtol=1e-12, atol=1e-14, window_doubling=False)
    r = integrate(ModelParams(delta1_r=1.0), LinearBias(1.0), config=cfg)
    assert abs(r.final_norm - 0.25) < 1e-8


def test_requested_evaluation_times_are_honored():
    times = [-7.0, 0.0, 13.5]
    r = integrate(
        ModelParams(delta1_r=1.0, gamma_d=0.2), LinearBias(1.0), config=FAST, t_eval=times
    )
    assert r.evaluations.shape == (3, 4)
    assert list(r.evaluations[:, 0]) == times
    # states are physical
    norms = 0.25 * r.evaluations[:, 1] ** 2 + r.evaluations[:, 2] ** 2 + r.evaluations[:, 3] ** 2
    assert np.all(norms <= 0.25 + 1e-6)


def test_evaluation_times_outside_window_rejected():
    with pytest.raises(InvalidInputError):
        integrate(ModelParams(delta1_r=1.0), LinearBias(1.0), config=FAST, t_eval=[1e6])


# ---------------------------------------------------------------------------
# full (unrotated) system
# ---------------------------------------------------------------------------


def test_full_system_agrees_with_reduced_for_real_gap():
    params = ModelParams(delta1_r=1.0, gamma_d=0.3)
    rf = integrate_full(params, LinearBias(2.0))
    rr = integrate(params, LinearBias(2.0))
    assert abs(rf.x_inf - rr.x_inf) <= 10.0 * SimConfig().rtol


def test_full_system_phase_invariance():
    curves = []
    span = np.linspace(-30.0, 30.0, 9)
    for phase in (0.0, math.pi / 2):
        params = ModelParams(delta1_r=math.cos(phase), delta1_i=math.sin(phase), gamma_d=0.1)
        r = integrate_full(params, LinearBias(1.0), config=FAST, t_eval=span)
        curves.append(r.evaluations[:, 1])
    assert np.max(np.abs(curves[0] - curves[1])) <= 10.0 * FAST.rtol


def test_relaxation_is_an_exact_envelope():
    tgrid = np.linspace(-30.0, 30.0, 13)
    rf = integrate_full(
        ModelParams(delta1_r=1.0, gamma_d=0.2, gamma_e=0.05), LinearBias(1.0),
        config=FAST, t_eval=tgrid,
    )
    rr = integrate(
        ModelParams(delta1_r=1.0, gamma_d=0.2), LinearBias(1.0),
        config=FAST, t_eval=tgrid,
    )
    wrapped = apply_relaxation_envelope(
        np.column_stack([tgrid, rr.evaluations[:, 1]]), 0.05, rr.t_window[0]
    )
    assert np.max(np.abs(wrapped[:, 1] - rf.evaluations[:, 1])) < 1e-9
    # with relaxation there is no window-doubling estimate
    assert math.isnan(rf.x_inf_uncertainty)


def test_full_requires_full_state_init():
    with pytest.raises(InvalidInputError):
        integrate_full(
            ModelParams(delta1_r=1.0), LinearBias(1.0),
            init=InitialCondition(state=ReducedState(x=1.0), t0=-10.0),
        )
    with pytest.raises(InvalidInputError):
        integrate(
            ModelParams(delta1_r=1.0), LinearBias(1.0),
            init=InitialCondition(state=FullState(X1=1.0), t0=-10.0),
        )


# ---------------------------------------------------------------------------
# custom initial conditions
# ---------------------------------------------------------------------------


def test_restart_from_evaluated_state_continues_the_run():
    params = ModelParams(delta1_r=1.0, gamma_d=0.1)
    first = integrate(params, LinearBias(1.0), config=FAST, t_eval=[0.0, 40.0])
    mid, end = first.evaluations
    second = integrate(
        params,
        LinearBias(1.0),
        init=InitialCondition(state=ReducedState(x=mid[1], p_r=mid[2], p_i=mid[3]), t0=0.0),
        config=dataclasses.replace(FAST, t_span=(0.0, 40.0)),
        t_eval=[40.0],
    )
    assert np.max(np.abs(second.evaluations[0, 1:] - end[1:])) < 1e-9


def test_plain_ivp_close_to_edge_to_edge_estimate():
    # Starting explicitly at the window edge loses the analytic left-tail
    # correction, so the two readouts agree only to the tail size.
    params = ModelParams(delta1_r=1.0, gamma_d=0.1)
    std = integrate(params, LinearBias(1.0))
    ivp = integrate(params, LinearBias(1.0), init=InitialCondition.standard(-40.0))
    assert abs(std.x_inf - ivp.x_inf) < 5e-3


# ---------------------------------------------------------------------------
# non-linear bias profiles
# ---------------------------------------------------------------------------


def test_sinusoidal_profile_needs_explicit_span():
    with pytest.raises(InvalidInputError):
        integrate(ModelParams(delta1_r=1.0, gamma_d=0.5), SinusoidalBias(2.0, 1.0))
    r = integrate(
        ModelParams(delta1_r=1.0, gamma_d=0.5),
        SinusoidalBias(2.0, 1.0),
        config=dataclasses.replace(FAST, t_span=(-20.0, 20.0)),
    )
    assert abs(r.x_inf) <= 1.0 + 1e-8


def test_tabulated_profile_guards_its_span():
    bias = TabulatedBias(samples=((-10.0, -10.0), (0.0, 0.0), (10.0, 10.0)))
    with pytest.raises(InvalidProfileError):
        integrate(ModelParams(delta1_r=1.0), bias,
                  config=dataclasses.replace(FAST, t_span=(-20.0, 20.0)))
    r = integrate(ModelParams(delta1_r=1.0), bias,
                  config=dataclasses.replace(FAST, t_span=(-10.0, 10.0)))
    assert math.isfinite(r.x_inf)


def test_piecewise_profile_runs():
    bias = PiecewiseLinearBias(nodes=((-15.0, -15.0), (15.0, 15.0)))
    r = integrate(
        ModelParams(delta1_r=1.0, gamma_d=0.2), bias,
        config=dataclasses.replace(FAST, t_span=(-15.0, 15.0), emit_trajectory=True),
    )
    tr = r.trajectory
    norms = 0.25 * tr[:, 1] ** 2 + tr[:, 2] ** 2 + tr[:, 3] ** 2
    assert np.max(np.diff(norms)) <= 50.0 * (FAST.atol + FAST.rtol * 0.25)


# ---------------------------------------------------------------------------
# failure modes
# ---------------------------------------------------------------------------


def test_step_budget_exhaustion_carries_partial_result():
    with pytest.raises(NonConvergenceError) as exc_info:
        integrate(ModelParams(delta1_r=1.0, gamma_d=0.1), LinearBias(1.0),
                  config=SimConfig(max_steps=50))
    partial = exc_info.value.partial_result
    assert partial is not None
    assert partial.n_steps == 50
    assert partial.t_window[1] < 40.0  # stopped before the window end


def test_config_validation():
    with pytest.raises(InvalidInputError):
        SimConfig(rtol=0.0)
    with pytest.raises(InvalidInputError):
        SimConfig(atol=-1e-9)
    with pytest.raises(InvalidInputError):
        SimConfig(window_factor=2.0)
    with pytest.raises(InvalidInputError):
        SimConfig(t_span=(3.0, -3.0))
    with pytest.raises(InvalidInputError):
        SimConfig(max_steps=0)
