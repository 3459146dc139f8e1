"""Method-of-lines solver for the Lagrangian p-system on a truncated half line.

Nodes ``0 = x_0 < ... < x_n = L`` are uniform. At ``x = 0`` the wall sets
``u = 0``; at ``x = L`` both unknowns keep their far-field values. Space is
discretized with second-order central differences (summation-by-parts row at
the wall) and a conservative diffusive flux, time with the two-stage SSP
Runge-Kutta scheme. With trapezoid weights the discrete mass changes exactly
by ``(u_n + u_{n-1}) / 2 - u_0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .errors import BlowUpError, ConfigurationError, DomainError
from .gas import GasModel, ShockEndStates
from .profile import ShockProfile, decay_rates, evaluate_profile

MIN_CELLS = 64
DEFAULT_CFL = 0.4

_OK, _NONPOSITIVE, _NAN = 0, 1, 2


@dataclass(frozen=True, eq=False)
class Grid1D:
    L: float
    n: int
    x: np.ndarray = field(repr=False)
    dx: float

    @classmethod
    def uniform(cls, L: float, n: int) -> "Grid1D":
        if n < MIN_CELLS:
            raise ConfigurationError(f"grid needs at least {MIN_CELLS} cells, got {n}")
        if not L > 0:
            raise ConfigurationError("domain length must be positive")
        x = np.linspace(0.0, L, n + 1)
        x.setflags(write=False)
        return cls(L=float(L), n=int(n), x=x, dx=float(L) / n)


@dataclass(frozen=True, eq=False)
class FluidState:
    t: float
    v: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class InitialDataSpec:
    kind: str = "bump"
    amplitude: float = 0.0
    support: tuple[float, float] | None = None
    seed: int = 0
    beta: float = 30.0

    KINDS = ("pure-profile", "bump", "random-smooth")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"initial.kind must be one of {self.KINDS}, got {self.kind!r}")
        if not self.beta > 0:
            raise ConfigurationError("beta must be positive")
        if self.amplitude < 0:
            raise ConfigurationError("initial.amplitude must be non-negative")


def check_domain(grid: Grid1D, states: ShockEndStates, gas: GasModel, beta: float, t_final: float) -> None:
    """Reject domains too short to hold the shock plus ten e-folds of its right tail at ``t_final``."""
    need = states.s * t_final + beta + 10.0 / min(decay_rates(states, gas))
    if not grid.L > need:
        raise ConfigurationError(
            f"domain length {grid.L:.6g} must exceed s*T + beta + 10/min(C) = {need:.6g}"
        )


def wall_cutoff(x, beta: float):
    """Smooth factor vanishing at the wall: ``tanh(x / l)**2`` with ``l = min(beta/10, 1)``."""
    ell = min(beta / 10.0, 1.0)
    return np.tanh(np.asarray(x) / ell) ** 2


def _mollifier(z):
    out = np.zeros_like(z)
    inside = np.abs(z) < 1
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


def _bump_derivative(z):
    # d/dz exp(-1/(1-z^2)) = -2z/(1-z^2)^2 exp(-1/(1-z^2))
    out = np.zeros_like(z)
    inside = np.abs(z) < 1
    zi = z[inside]
    out[inside] = -2 * zi / (1 - zi**2) ** 2 * np.exp(-1.0 / (1.0 - zi**2))
    return out


def _perturbation(spec: InitialDataSpec, grid: Grid1D, shock_at: float):
    x = grid.x
    if spec.kind == "pure-profile" or spec.amplitude == 0:
        return np.zeros_like(x), np.zeros_like(x)
    lo, hi = spec.support if spec.support is not None else (max(shock_at - 5.0, 0.05 * grid.L), shock_at + 5.0)
    if not (0 < lo < hi < grid.L):
        raise ConfigurationError(f"perturbation support ({lo}, {hi}) must lie inside (0, {grid.L})")
    centre, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    z = (x - centre) / half
    if spec.kind == "bump":
        # derivative of a compactly supported bump: zero mean by construction
        b_v = _bump_derivative(z)
        b_v /= np.max(np.abs(b_v))
        return b_v, np.zeros_like(x)
    rng = np.random.default_rng(spec.seed)
    window = _mollifier(z) / math.exp(-1.0)
    b = []
    for _ in range(2):
        k = rng.uniform(0.5, 4.0, size=4) * math.pi / half
        phase = rng.uniform(0, 2 * math.pi, size=4)
        amp = rng.normal(size=4)
        wave = (amp[:, None] * np.sin(k[:, None] * (x - lo) + phase[:, None])).sum(axis=0)
        field_ = window * wave
        b.append(field_ / np.max(np.abs(field_)))
    return b[0], b[1]


def make_initial_data(spec: InitialDataSpec, profile: ShockProfile, grid: Grid1D) -> FluidState:
    """Profile translated to ``beta`` plus a perturbation of size ``amplitude``.

    ``u`` is multiplied by :func:`wall_cutoff` so that ``u(0) = 0`` holds exactly.
    """
    beta = spec.beta
    if not (0.1 * grid.L < beta < 0.9 * grid.L):
        raise ConfigurationError(f"beta={beta} must lie in (0.1 L, 0.9 L) = ({0.1 * grid.L}, {0.9 * grid.L})")
    V, U, _ = evaluate_profile(profile, grid.x - beta)
    b_v, b_u = _perturbation(spec, grid, beta)
    v0 = V + spec.amplitude * b_v
    u0 = U * wall_cutoff(grid.x, beta) + spec.amplitude * b_u
    u0[0] = 0.0
    if np.any(v0 <= 0):
        raise DomainError(f"perturbation amplitude {spec.amplitude} makes the specific volume non-positive")
    # far-field values are pinned to the end state exactly
    v0[-1] = profile.states.v_plus
    u0[-1] = profile.states.u_plus
    return FluidState(t=0.0, v=v0, u=u0)


@njit(cache=True)
def _rhs_kernel(v, u, a, gamma, alpha, dx, dv, du, p, mob):
    n = v.size - 1
    if alpha == 0.0:
        for i in range(n + 1):
            p[i] = a * np.exp(-gamma * np.log(v[i]))
            mob[i] = 1.0 / v[i]
    else:
        for i in range(n + 1):
            lv = np.log(v[i])
            p[i] = a * np.exp(-gamma * lv)
            mob[i] = np.exp(-(alpha + 1.0) * lv)
    inv2dx = 0.5 / dx
    invdx2 = 1.0 / (dx * dx)
    # summation-by-parts closure: with trapezoid weights no mass crosses the wall
    dv[0] = (u[1] - u[0]) / dx
    du[0] = 0.0
    q_left = 0.5 * (mob[0] + mob[1]) * (u[1] - u[0])
    for i in range(1, n):
        q_right = 0.5 * (mob[i] + mob[i + 1]) * (u[i + 1] - u[i])
        dv[i] = (u[i + 1] - u[i - 1]) * inv2dx
        du[i] = -(p[i + 1] - p[i - 1]) * inv2dx + (q_right - q_left) * invdx2
        q_left = q_right
    dv[n] = 0.0
    du[n] = 0.0


@njit(cache=True)
def _advance(v, u, dt, nsteps, a, gamma, alpha, dx):
    """In-place SSP-RK2 steps. Returns (status, steps_done, bad_index)."""
    m = v.size
    dv = np.empty(m)
    du = np.empty(m)
    p = np.empty(m)
    mob = np.empty(m)
    v1 = np.empty(m)
    u1 = np.empty(m)
    for k in range(nsteps):
        _rhs_kernel(v, u, a, gamma, alpha, dx, dv, du, p, mob)
        bad = -1
        for i in range(m):
            v1[i] = v[i] + dt * dv[i]
            u1[i] = u[i] + dt * du[i]
            if not v1[i] > 0.0 and bad < 0:
                bad = i
        u1[0] = 0.0
        if bad >= 0:
            return (_NAN if v1[bad] != v1[bad] else _NONPOSITIVE), k, bad
        _rhs_kernel(v1, u1, a, gamma, alpha, dx, dv, du, p, mob)
        for i in range(m):
            v[i] = 0.5 * v[i] + 0.5 * (v1[i] + dt * dv[i])
            u[i] = 0.5 * u[i] + 0.5 * (u1[i] + dt * du[i])
            if (not v[i] > 0.0 or u[i] != u[i]) and bad < 0:
                bad = i
        u[0] = 0.0
        if bad >= 0:
            return (_NONPOSITIVE if v[bad] <= 0.0 else _NAN), k, bad
    return _OK, nsteps, -1


def rhs_semi_discrete(state: FluidState, gas: GasModel, grid: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    """Semi-discrete time derivatives ``(dv/dt, du/dt)`` at every node."""
    v = np.ascontiguousarray(state.v, dtype=float)
    u = np.ascontiguousarray(state.u, dtype=float)
    if np.any(v <= 0):
        raise DomainError("specific volume must stay positive")
    m = v.size
    dv, du, p, mob = np.empty(m), np.empty(m), np.empty(m), np.empty(m)
    _rhs_kernel(v, u, gas.a, gas.gamma, gas.alpha, grid.dx, dv, du, p, mob)
    return dv, du


def stable_dt(state: FluidState, gas: GasModel, grid: Grid1D, cfl: float = DEFAULT_CFL) -> float:
    """``cfl * min(dx / c_max, dx**2 / (2 nu_max))`` over the current state."""
    v = state.v
    c_max = math.sqrt(float(np.max(gas.a * gas.gamma * v ** (-gas.gamma - 1.0))))
    nu_max = float(np.max(v ** (-(gas.alpha + 1.0))))
    return cfl * min(grid.dx / c_max, grid.dx**2 / (2.0 * nu_max))


def advance(state: FluidState, dt: float, nsteps: int, gas: GasModel, grid: Grid1D) -> FluidState:
    """Take ``nsteps`` SSP-RK2 steps of size ``dt``; raises :class:`BlowUpError` on v <= 0 or NaN."""
    v = np.array(state.v, dtype=float)
    u = np.array(state.u, dtype=float)
    status, done, idx = _advance(v, u, float(dt), int(nsteps), gas.a, gas.gamma, gas.alpha, grid.dx)
    if status != _OK:
        t_fail = state.t + (done + 1) * dt
        what = "NaN" if status == _NAN else "non-positive specific volume"
        raise BlowUpError(f"{what} at x={grid.x[idx]:.6g} (node {idx}), t={t_fail:.6g}", t_fail, int(idx))
    return FluidState(t=state.t + nsteps * dt, v=v, u=u)


def step(state: FluidState, dt: float, gas: GasModel, grid: Grid1D) -> FluidState:
    """One SSP-RK2 step with the wall value re-imposed after each stage."""
    return advance(state, dt, 1, gas, grid)


def with_time(state: FluidState, t: float) -> FluidState:
    return replace(state, t=t)
