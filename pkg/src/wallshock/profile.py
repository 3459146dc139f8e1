"""Viscous 2-shock traveling wave: construction, lookup, decay rates and the asymptotic shift.

The profile ODE ``s V' / V**(alpha+1) = h(V)`` is integrated in the log-odds
variable ``q = log((V - v_minus) / (v_plus - V))``. ``q`` is strictly
increasing with slope tending to ``C_minus`` and ``C_plus`` in the two tails,
so the ODE has no fixed points in ``q`` and both deviations from the end
states keep full relative precision far into the tails.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson, solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.special import expit

from .errors import (
    ConfigurationError,
    DomainError,
    InsufficientTailError,
    ProfileRefinementError,
    TruncationWarning,
)
from .gas import GasModel, ShockEndStates, pressure, pressure_derivative, pressure_jump

ODE_RESIDUAL_TOL = 1e-8
ENDPOINT_CLAMP_TOL = 1e-9
TAIL_FLOOR = 1e-13
_ODE_RTOL = 1e-13
_ODE_ATOL = 1e-13
_AUTO_REFINEMENTS = 6
TABLE_EFOLDS = 25.0
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True, eq=False)
class ShockProfile:
    xi: np.ndarray
    V: np.ndarray
    U: np.ndarray
    H: np.ndarray
    q: np.ndarray
    dev_minus: np.ndarray
    dev_plus: np.ndarray
    dV: np.ndarray
    C_minus: float
    C_plus: float
    states: ShockEndStates
    gas: GasModel
    ode_residual: float

    @property
    def half_width(self) -> float:
        return float(max(-self.xi[0], self.xi[-1]))

    @property
    def extent(self) -> tuple[float, float]:
        return float(self.xi[0]), float(self.xi[-1])

    @property
    def dxi(self) -> float:
        return float(self.xi[1] - self.xi[0])


@dataclass(frozen=True)
class ProfileSample:
    V: np.ndarray
    U: np.ndarray
    H: np.ndarray
    dV: np.ndarray
    dev_minus: np.ndarray
    dev_plus: np.ndarray


def _h_over_devs(w_minus, w_plus, states: ShockEndStates, gas: GasModel):
    """``h(V) / (w_minus * w_plus)`` evaluated from whichever end state is nearer."""
    s2 = states.s**2
    w_minus = np.asarray(w_minus, dtype=float)
    w_plus = np.asarray(w_plus, dtype=float)
    left = w_minus <= w_plus
    out = np.empty(np.broadcast(w_minus, w_plus).shape)

    wl, wr = w_minus[left], w_plus[left]
    safe = np.where(wl > 0, wl, 1.0)
    slope_l = np.where(wl > 0, pressure_jump(states.v_minus, safe, gas) / safe,
                       pressure_derivative(states.v_minus, gas))
    out[left] = (-s2 - slope_l) / wr

    wl, wr = w_minus[~left], w_plus[~left]
    safe = np.where(wr > 0, wr, 1.0)
    slope_r = np.where(wr > 0, pressure_jump(states.v_plus, -safe, gas) / -safe,
                       pressure_derivative(states.v_plus, gas))
    out[~left] = (s2 + slope_r) / wl
    return out


def _deviations(q, strength):
    return strength * expit(q), strength * expit(-q)


def _q_slope(q, states: ShockEndStates, gas: GasModel):
    w_minus, w_plus = _deviations(q, states.strength)
    V = states.v_minus + w_minus
    return states.strength * V ** (gas.alpha + 1) * _h_over_devs(w_minus, w_plus, states, gas) / states.s


def profile_h(V, states: ShockEndStates, gas: GasModel):
    """``h(V) = -s**2 V - p(V) - b``."""
    return -(states.s**2) * V - pressure(V, gas) - states.b


def profile_rhs(V, states: ShockEndStates, gas: GasModel):
    """Right-hand side ``dV/dxi = V**(alpha+1) h(V) / s`` of the profile ODE."""
    V_arr = np.asarray(V, dtype=float)
    lo = states.v_minus * (1 - 1e-9)
    hi = states.v_plus * (1 + 1e-9)
    if np.any((V_arr < lo) | (V_arr > hi)):
        raise DomainError(f"profile_rhs: V outside [{states.v_minus!r}, {states.v_plus!r}]")
    V_arr = np.clip(V_arr, states.v_minus, states.v_plus)
    w_minus = V_arr - states.v_minus
    w_plus = states.v_plus - V_arr
    # deviation form keeps h exactly zero at both end states
    h = np.where(
        w_minus <= w_plus,
        -(states.s**2) * w_minus - pressure_jump(states.v_minus, w_minus, gas),
        states.s**2 * w_plus - pressure_jump(states.v_plus, -w_plus, gas),
    )
    out = V_arr ** (gas.alpha + 1) * h / states.s
    return float(out) if np.ndim(V) == 0 else out


def decay_rates(states: ShockEndStates, gas: GasModel) -> tuple[float, float]:
    """Exponential tail rates ``C_pm = v_pm**(alpha+1) |p'(v_pm) + s**2| / s``."""
    s2 = states.s**2
    c_minus = states.v_minus ** (gas.alpha + 1) * abs(pressure_derivative(states.v_minus, gas) + s2) / states.s
    c_plus = states.v_plus ** (gas.alpha + 1) * abs(pressure_derivative(states.v_plus, gas) + s2) / states.s
    return float(c_minus), float(c_plus)


def default_extents(states: ShockEndStates, gas: GasModel, efolds: float = TABLE_EFOLDS) -> tuple[float, float]:
    """Table reach ``(efolds / C_minus, efolds / C_plus)`` to the left and right of the centre.

    Each tail keeps the same number of e-folds, so the last increments of ``V``
    stay far above the floating-point spacing of ``v_pm``.
    """
    c_minus, c_plus = decay_rates(states, gas)
    return efolds / c_minus, efolds / c_plus


def default_resolution(states: ShockEndStates, gas: GasModel) -> float:
    """Starting grid spacing for automatic refinement (a fraction of the thinnest e-folding length)."""
    return 0.04 / max(decay_rates(states, gas))


def _xi_of_q(q_target: float, q_start: float, states, gas) -> float:
    """Distance travelled while q goes from ``q_start`` to ``q_target``."""
    if q_target == q_start:
        return 0.0
    # q' is smooth and bounded away from zero, so a few panels are ample
    panels = max(1, int(abs(q_target - q_start) / 0.25) + 1)
    edges = np.linspace(q_start, q_target, panels + 1)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        nodes = 0.5 * (b - a) * (_GAUSS_NODES + 1) + a
        total += 0.5 * (b - a) * np.sum(_GAUSS_WEIGHTS / _q_slope(nodes, states, gas))
    return float(total)


def compute_profile(
    states: ShockEndStates,
    gas: GasModel,
    half_width: float | None = None,
    resolution: float | None = None,
    anchor_fraction: float = 0.5,
) -> ShockProfile:
    """Tabulate the viscous shock profile on a uniform grid.

    The table spans ``[-half_width, half_width]`` when ``half_width`` is given,
    otherwise :func:`default_extents`. The translate is fixed by
    ``V(0) = (v_minus + v_plus) / 2``. The ODE is seeded at the point where
    ``V`` equals ``v_minus + anchor_fraction * (v_plus - v_minus)``; any
    anchor yields the same normalized table.
    """
    c_minus, c_plus = decay_rates(states, gas)
    extents = default_extents(states, gas) if half_width is None else (half_width, half_width)
    if not max(math.exp(-c_minus * extents[0]), math.exp(-c_plus * extents[1])) < ENDPOINT_CLAMP_TOL:
        raise ConfigurationError(
            f"half_width={half_width!r} too small: exp(-C*half_width) must be < {ENDPOINT_CLAMP_TOL} on both sides"
        )
    if not 0.0 < anchor_fraction < 1.0:
        raise ConfigurationError("anchor_fraction must lie in (0, 1)")
    if resolution is not None:
        return _tabulate(states, gas, extents, resolution, anchor_fraction, c_minus, c_plus)

    resolution = default_resolution(states, gas)
    for _ in range(_AUTO_REFINEMENTS):
        try:
            return _tabulate(states, gas, extents, resolution, anchor_fraction, c_minus, c_plus)
        except ProfileRefinementError as exc:
            last = exc
            resolution *= 0.5
    raise last


def _tabulate(states, gas, extents, resolution, anchor_fraction, c_minus, c_plus) -> ShockProfile:
    n_left = max(int(round(extents[0] / resolution)), 8)
    n_right = max(int(round(extents[1] / resolution)), 8)
    xi = resolution * np.arange(-n_left, n_right + 1, dtype=float)

    q_anchor = math.log(anchor_fraction / (1.0 - anchor_fraction))
    xi_anchor = -_xi_of_q(0.0, q_anchor, states, gas)

    def rhs(_, y):
        return _q_slope(y, states, gas)

    q = np.empty_like(xi)
    right = xi >= xi_anchor
    for mask, end in ((right, xi[-1]), (~right, xi[0])):
        if not mask.any():
            continue
        t_eval = xi[mask] if end > 0 else xi[mask][::-1]
        sol = solve_ivp(rhs, (xi_anchor, end), [q_anchor], method="DOP853",
                        t_eval=t_eval, rtol=_ODE_RTOL, atol=_ODE_ATOL)
        if not sol.success:
            raise ProfileRefinementError(f"profile integration failed: {sol.message}", math.inf)
        q[mask] = sol.y[0] if end > 0 else sol.y[0][::-1]

    profile = _assemble(xi, q, states, gas, c_minus, c_plus)
    _check_invariants(profile)
    return profile


def _assemble(xi, q, states, gas, c_minus, c_plus, residual=None) -> ShockProfile:
    w_minus, w_plus = _deviations(q, states.strength)
    V = states.v_minus + w_minus
    h = w_minus * w_plus * _h_over_devs(w_minus, w_plus, states, gas)
    dV = V ** (gas.alpha + 1) * h / states.s
    U = -states.s * w_minus
    H = U - h / states.s
    if residual is None:
        residual = _ode_residual(xi, V, h, states, gas)
    for arr in (xi, V, U, H, q, w_minus, w_plus, dV):
        arr.setflags(write=False)
    return ShockProfile(xi=xi, V=V, U=U, H=H, q=q, dev_minus=w_minus, dev_plus=w_plus, dV=dV,
                        C_minus=c_minus, C_plus=c_plus, states=states, gas=gas,
                        ode_residual=residual)


def _ode_residual(xi, V, h, states, gas) -> float:
    d = xi[1] - xi[0]
    dV = (V[:-4] - 8 * V[1:-3] + 8 * V[3:-1] - V[4:]) / (12 * d)
    r = states.s * dV / V[2:-2] ** (gas.alpha + 1) - h[2:-2]
    return float(np.max(np.abs(r)))


def _check_invariants(profile: ShockProfile) -> None:
    st = profile.states
    if profile.ode_residual > ODE_RESIDUAL_TOL:
        raise ProfileRefinementError(
            f"profile ODE residual {profile.ode_residual:.3e} exceeds {ODE_RESIDUAL_TOL:.0e}; "
            f"refine resolution (dxi={profile.dxi:.3e})",
            profile.ode_residual,
        )
    if not np.all(np.diff(profile.q) > 0):
        raise ProfileRefinementError("profile is not strictly monotone", profile.ode_residual)
    clamp = ENDPOINT_CLAMP_TOL * st.strength
    if profile.dev_minus[0] > clamp or profile.dev_plus[-1] > clamp:
        raise ConfigurationError(
            f"profile tails not converged on [{profile.xi[0]:.6g}, {profile.xi[-1]:.6g}]: "
            f"|V-v_-|={profile.dev_minus[0]:.2e}, |V-v_+|={profile.dev_plus[-1]:.2e}"
        )


def _spline(profile: ShockProfile) -> CubicHermiteSpline:
    spline = profile.__dict__.get("_spline")
    if spline is None:
        slope = _q_slope(profile.q, profile.states, profile.gas)
        spline = CubicHermiteSpline(profile.xi, profile.q, slope, extrapolate=False)
        object.__setattr__(profile, "_spline", spline)
    return spline


def profile_detail(profile: ShockProfile, xi) -> ProfileSample:
    """Profile values, slope ``V'`` and both end-state deviations at arbitrary ``xi``.

    Inside the table, ``q`` is interpolated by a cubic Hermite spline with the
    exact ODE slopes (monotone because ``q' > 0`` and smooth); outside it the
    end states are extended as constants.
    """
    st, gas = profile.states, profile.gas
    xi = np.asarray(xi, dtype=float)
    scalar = xi.ndim == 0
    xi = np.atleast_1d(xi)
    lo, hi = profile.xi[0], profile.xi[-1]
    inside = (xi >= lo) & (xi <= hi)

    w_minus = np.where(xi > hi, st.strength, 0.0)
    w_plus = np.where(xi < lo, st.strength, 0.0)
    dV = np.zeros_like(xi)
    h = np.zeros_like(xi)
    if inside.any():
        q = _spline(profile)(xi[inside])
        q = np.where(xi[inside] == hi, profile.q[-1], q)
        wm, wp = _deviations(q, st.strength)
        hh = wm * wp * _h_over_devs(wm, wp, st, gas)
        w_minus[inside] = wm
        w_plus[inside] = wp
        h[inside] = hh
        dV[inside] = (st.v_minus + wm) ** (gas.alpha + 1) * hh / st.s
    V = np.where(xi > hi, st.v_plus, st.v_minus + w_minus)
    U = np.where(xi > hi, st.u_plus, -st.s * w_minus)
    H = U - h / st.s
    H = np.where(xi > hi, st.u_plus, np.where(xi < lo, 0.0, H))
    # outside the table the tails are clamped to the end states
    w_minus = np.where(xi > hi, st.strength, w_minus)
    out = ProfileSample(V=V, U=U, H=H, dV=dV, dev_minus=w_minus, dev_plus=w_plus)
    if scalar:
        return ProfileSample(*(float(getattr(out, f)[0]) for f in ProfileSample.__dataclass_fields__))
    return out


def evaluate_profile(profile: ShockProfile, xi):
    """Return ``(V, U, H)`` at ``xi`` (scalar or array)."""
    sample = profile_detail(profile, xi)
    return sample.V, sample.U, sample.H


def fit_decay(profile: ShockProfile) -> tuple[float, float]:
    """Least-squares exponential rates of ``|V - v_minus|`` and ``|V - v_plus|`` in the tails.

    Each tail consists of the table nodes on that side whose deviation is at
    least ``TAIL_FLOOR * (v_plus - v_minus)``; the fit uses the outermost quarter
    of those nodes.
    """
    floor = TAIL_FLOOR * profile.states.strength
    rates = []
    for side, dev in ((profile.xi < 0, profile.dev_minus), (profile.xi > 0, profile.dev_plus)):
        idx = np.flatnonzero(side & (dev >= floor))
        if side[0]:
            idx = idx[: max(len(idx) // 4, 0)]
        else:
            idx = idx[len(idx) - len(idx) // 4:]
        if len(idx) < 10:
            raise InsufficientTailError(f"only {len(idx)} usable tail points for the decay fit")
        slope = np.polyfit(np.abs(profile.xi[idx]), np.log(dev[idx]), 1)[0]
        rates.append(-slope)
    return float(rates[0]), float(rates[1])


def boundary_flux_integral(beta: float, profile: ShockProfile) -> float:
    """``int_0^inf U(-s t - beta) dt`` (negative: the wall sees the left tail)."""
    c_fit = fit_decay(profile)[0]
    lo = profile.xi[0]
    if -beta <= lo:
        tail = profile.dev_minus[0] * math.exp(-c_fit * (beta + lo)) / c_fit
        return -tail
    nodes = profile.xi <= -beta
    k = int(np.flatnonzero(nodes)[-1])
    body = simpson(profile.dev_minus[: k + 1], x=profile.xi[: k + 1]) if k >= 1 else 0.0
    a, b = profile.xi[k], -beta
    if b > a:
        gx = 0.5 * (b - a) * (_GAUSS_NODES + 1) + a
        body += 0.5 * (b - a) * np.sum(_GAUSS_WEIGHTS * profile_detail(profile, gx).dev_minus)
    tail = profile.dev_minus[0] / c_fit
    # U = -s (V - v_minus) and dt = dy / s
    return -(body + tail)


def compute_shift(v0, x, beta: float, profile: ShockProfile, tol: float = 1e-10) -> float:
    """Asymptotic shift ``beta0`` selected by mass balance and the boundary flux.

    ``beta0 = (int_0^inf [v0(x) - V(x - beta)] dx + int_0^inf U(-s t - beta) dt) / (v_plus - v_minus)``
    with the spatial integral taken over the grid ``x`` by the trapezoid rule, the
    quadrature whose discrete mass the solver conserves exactly.
    """
    v0 = np.asarray(v0, dtype=float)
    x = np.asarray(x, dtype=float)
    integrand = v0 - evaluate_profile(profile, x - beta)[0]
    edge = abs(integrand[-1])
    if edge > tol:
        warnings.warn(
            f"initial perturbation not decayed at x={x[-1]:.6g}: |v0 - V| = {edge:.3e}; "
            f"truncation error bounded by about {edge * (x[-1] - x[0]):.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    mass = np.trapezoid(integrand, x=x)
    return float((mass + boundary_flux_integral(beta, profile)) / profile.states.strength)
