import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wallshock.config import parse_config
from wallshock.diagnostics import (
    DiagnosticsRecord,
    anti_derivative,
    compute_perturbations,
    ddx,
    effective_velocity,
    energy_report,
    energy_terms,
    fit_exponential_rate,
    mass_defect,
    sobolev_norm,
    sobolev_norms,
    steady_wave_residual,
    sup_error,
)
from wallshock.errors import IncompleteRecordError, TruncationWarning
from wallshock.gas import GasModel, solve_rankine_hugoniot
from wallshock.ibvp import FluidState, Grid1D
from wallshock.profile import compute_profile, evaluate_profile, profile_detail
from wallshock.simulate import pure_state, run

GAS = GasModel(a=1.0, gamma=2.0)
STATES = solve_rankine_hugoniot(2.0, -1.0, GAS)


@pytest.fixture(scope="module")
def profile():
    return compute_profile(STATES, GAS)


def G(v, alpha):
    """Antiderivative of ``v**-(alpha+1)``."""
    return np.log(v) if alpha == 0 else v ** (-alpha) / (-alpha)


def test_anti_derivative_zero():
    grid = Grid1D.uniform(10.0, 100)
    assert np.all(anti_derivative(np.zeros(101), grid) == 0)


def test_anti_derivative_of_bump():
    grid = Grid1D.uniform(20.0, 2000)
    f = np.exp(-((grid.x - 10.0) ** 2))
    F = anti_derivative(f, grid)
    assert F[-1] == 0.0
    assert F[0] == pytest.approx(-math.sqrt(math.pi), rel=1e-10)
    assert np.all(np.diff(F) >= 0)


def test_anti_derivative_round_trip():
    errs = []
    for n in (400, 800):
        grid = Grid1D.uniform(20.0, n)
        f = np.exp(-((grid.x - 10.0) ** 2)) * np.cos(grid.x)
        errs.append(np.max(np.abs(ddx(anti_derivative(f, grid), grid) - f)))
    assert errs[1] < 1e-3
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_anti_derivative_warns_on_undecayed_field():
    grid = Grid1D.uniform(10.0, 100)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        anti_derivative(np.ones(101), grid)
    assert any(issubclass(w.category, TruncationWarning) for w in caught)


def test_sobolev_norms_of_exponential():
    grid = Grid1D.uniform(40.0, 40_000)
    f = np.exp(-grid.x)
    assert sobolev_norm(f, grid, 0) ** 2 == pytest.approx(0.5, abs=1e-4)
    assert sobolev_norm(f, grid, 1) ** 2 == pytest.approx(1.0, abs=1e-4)
    assert sobolev_norm(np.zeros_like(f), grid, 2) == 0.0


@settings(max_examples=30, deadline=None)
@given(k=st.floats(0.1, 3.0), c=st.floats(0.0, 10.0))
def test_norm_monotone_in_order(k, c):
    grid = Grid1D.uniform(10.0, 200)
    f = np.sin(k * grid.x + c) * np.exp(-0.3 * grid.x)
    n0, n1, n2 = (sobolev_norm(f, grid, m) for m in range(3))
    assert n0 <= n1 <= n2


def test_sobolev_norms_order_limit(profile):
    grid = Grid1D.uniform(40.0, 400)
    fields = compute_perturbations(pure_state(profile, grid.x, 15.0), profile, 15.0, GAS, grid)
    with pytest.raises(ValueError):
        sobolev_norms(fields, grid, 3)


def test_effective_velocity_constant_state():
    grid = Grid1D.uniform(10.0, 100)
    state = FluidState(0.0, np.full(101, 1.5), np.full(101, -0.3))
    assert np.allclose(effective_velocity(state, GAS, grid), -0.3, atol=1e-15)


def test_effective_velocity_alpha_factor(profile):
    grid = Grid1D.uniform(40.0, 400)
    state = pure_state(profile, grid.x, 20.0)
    h0 = effective_velocity(state, GasModel(gamma=2.0, alpha=0.0), grid)
    h1 = effective_velocity(state, GasModel(gamma=2.0, alpha=1.0), grid)
    vx = ddx(state.v, grid)
    mask = np.abs(vx) > 1e-4
    ratio = (state.u - h1)[mask] / (state.u - h0)[mask]
    np.testing.assert_allclose(ratio, 1.0 / state.v[mask], rtol=1e-9)


def test_effective_velocity_matches_profile(profile):
    errs = []
    for n in (400, 800):
        grid = Grid1D.uniform(40.0, n)
        h = effective_velocity(pure_state(profile, grid.x, 20.0), GAS, grid)
        H = evaluate_profile(profile, grid.x - 20.0)[2]
        errs.append(np.max(np.abs(h - H)))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_exact_profile_has_zero_perturbation(profile):
    grid = Grid1D.uniform(40.0, 800)
    state = pure_state(profile, grid.x, 20.0)
    f = compute_perturbations(state, profile, 20.0, GAS, grid)
    assert np.max(np.abs(f.phi)) < 1e-13 and np.max(np.abs(f.psi)) < 1e-13
    assert np.max(np.abs(f.Psi)) < 1e-3  # only the stencil error in h
    assert sup_error(state, profile, 20.0, grid) == 0.0
    assert mass_defect(state, profile, 20.0, grid) == 0.0


def test_boundary_value_is_minus_mass(profile):
    grid = Grid1D.uniform(40.0, 800)
    state = pure_state(profile, grid.x, 20.0)
    v = state.v + 0.01 * np.exp(-((grid.x - 18.0) ** 2))
    state = FluidState(0.0, v, state.u)
    f = compute_perturbations(state, profile, 20.0, GAS, grid)
    assert f.phi[0] == pytest.approx(-mass_defect(state, profile, 20.0, grid), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 0.5, 1.0])
def test_Psi_minus_psi_closed_form(alpha):
    gas = GasModel(gamma=2.0, alpha=alpha)
    states = solve_rankine_hugoniot(2.0, -1.0, gas)
    prof = compute_profile(states, gas)
    grid = Grid1D.uniform(40.0, 1600)
    shift = 20.0
    base = pure_state(prof, grid.x, shift)
    v = base.v * (1 + 0.05 * np.exp(-((grid.x - 20.0) / 2) ** 2))
    u = base.u + 0.02 * np.exp(-((grid.x - 22.0) / 2) ** 2)
    f = compute_perturbations(FluidState(0.0, v, u), prof, shift, gas, grid)
    # Psi - psi = -int_x^L (v^-(a+1) v_x - V^-(a+1) V_x) = G(V) - G(v) at x, both vanishing at L
    V = evaluate_profile(prof, grid.x - shift)[0]
    closed = G(V, alpha) - G(v, alpha)
    closed -= closed[-1]
    assert np.max(np.abs((f.Psi - f.psi) - closed)) < 5e-4
    # and the discrete gap scales with dx^2
    grid2 = Grid1D.uniform(40.0, 3200)
    base2 = pure_state(prof, grid2.x, shift)
    v2 = base2.v * (1 + 0.05 * np.exp(-((grid2.x - 20.0) / 2) ** 2))
    u2 = base2.u + 0.02 * np.exp(-((grid2.x - 22.0) / 2) ** 2)
    f2 = compute_perturbations(FluidState(0.0, v2, u2), prof, shift, gas, grid2)
    V2 = evaluate_profile(prof, grid2.x - shift)[0]
    closed2 = G(V2, alpha) - G(v2, alpha)
    closed2 -= closed2[-1]
    e1 = np.max(np.abs((f.Psi - f.psi) - closed))
    e2 = np.max(np.abs((f2.Psi - f2.psi) - closed2))
    assert 3.0 <= e1 / e2 <= 5.0


def test_sup_error_taylor(profile):
    grid = Grid1D.uniform(40.0, 4000)
    state = pure_state(profile, grid.x, 20.0)
    d = 1e-5
    dV = profile_detail(profile, grid.x - 20.0).dV
    predicted = np.max(d * dV * (1 + STATES.s))
    assert sup_error(state, profile, 20.0 + d, grid) == pytest.approx(predicted, rel=1e-3)


def test_steady_wave_residual_second_order(profile):
    errs = []
    for n in (400, 800):
        grid = Grid1D.uniform(40.0, n)
        st_ = pure_state(profile, grid.x, 20.0)
        errs.append(steady_wave_residual(st_.v, st_.u, grid.dx, STATES.s, GAS))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_energy_terms_nonnegative(profile):
    grid = Grid1D.uniform(40.0, 400)
    state = pure_state(profile, grid.x, 20.0)
    v = state.v + 0.01 * np.exp(-((grid.x - 18.0) ** 2))
    f = compute_perturbations(FluidState(0.0, v, state.u), profile, 20.0, GAS, grid)
    terms = energy_terms(f, grid)
    assert all(val >= 0 for val in terms.values())
    assert terms["E2"] >= terms["D"] - sobolev_norm(ddx(ddx(ddx(f.psi, grid), grid), grid), grid) ** 2 - 1e-15


def test_fit_exponential_rate():
    t = np.linspace(0, 10, 101)
    A, rate = fit_exponential_rate(t, 3.0 * np.exp(-0.7 * t))
    assert A == pytest.approx(3.0, rel=1e-10) and rate == pytest.approx(0.7, rel=1e-10)
    # zeros are floored rather than crashing
    _, rate0 = fit_exponential_rate(t, np.zeros_like(t))
    assert rate0 == pytest.approx(0.0, abs=1e-12)


def test_record_append_series(profile):
    grid = Grid1D.uniform(40.0, 400)
    rec = DiagnosticsRecord()
    for t in (0.0, 0.5, 1.0):
        rec.append(pure_state(profile, grid.x, 20.0 + STATES.s * t, t), profile, 20.0 + STATES.s * t, GAS, grid)
    assert len(rec) == 3
    for name in DiagnosticsRecord.SERIES:
        assert len(getattr(rec, name)) == 3
    assert all(v >= 0 for v in rec.E2 + rec.D + rec.sup_error + rec.boundary_trace)


def test_energy_report_refuses_incomplete():
    with pytest.raises(IncompleteRecordError):
        energy_report(DiagnosticsRecord(), 10.0, 1.0)


def _small_config(**extra):
    flat = {"gas.gamma": 2, "shock.v_plus": 2, "shock.u_plus": -1, "initial.beta": 15, "time.t_final": 3}
    flat.update({k.replace("__", "."): v for k, v in extra.items()})
    return parse_config("\n".join(f"{k} = {json.dumps(v)}" for k, v in flat.items()))


def test_energy_report_zero_perturbation():
    # the exact profile relaxes to the discrete traveling wave; E2 saturates at O(dx^4)
    config = _small_config(initial__beta=20, time__t_final=30, grid__length=63, grid__n=600)
    rec = run(config)
    rep = energy_report(rec, config.beta, rec.meta["C_minus"])
    assert rep.passed and math.isfinite(rep.ratio)
    assert max(rec.E2) < 1e-4


def test_energy_report_blowup_negative_control():
    # over-amplitude data stepped past the stability limit: the run aborts and cannot be certified
    with pytest.warns(RuntimeWarning):
        config = _small_config(initial__kind="bump", initial__amplitude=0.5, time__cfl=1.9,
                               grid__length=40, grid__n=400)
    rec = run(config)
    assert not rec.complete
    assert "error" in rec.meta
    with pytest.raises(IncompleteRecordError):
        energy_report(rec, config.beta, rec.meta["C_minus"])
    assert rec.E2[-1] > rec.E2[0]


def test_boundary_trace_decay_rate():
    config = parse_config("""
gas.gamma = 1.4
shock.v_plus = 1
shock.u_plus = -0.5
initial.beta = 10
time.t_final = 6.45
grid.length = 60
grid.n = 1200
""")
    rec = run(config)
    target = rec.meta["C_minus"] * rec.meta["s"]
    _, rate = fit_exponential_rate(rec.array("t"), rec.array("boundary_trace"))
    assert rate == pytest.approx(target, rel=0.25)
