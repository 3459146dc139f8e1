"""Run orchestration: config in, :class:`DiagnosticsRecord` out."""

from __future__ import annotations

import functools
import math

import numpy as np

from .config import ExperimentConfig
from .diagnostics import DiagnosticsRecord
from .errors import BlowUpError
from .gas import GasModel, solve_rankine_hugoniot
from .ibvp import FluidState, advance, check_domain, make_initial_data, stable_dt, with_time
from .profile import ShockProfile, compute_profile, compute_shift, evaluate_profile


@functools.lru_cache(maxsize=32)
def _cached_profile(gas: GasModel, v_plus: float, u_plus: float,
                    half_width: float, resolution: float | None) -> ShockProfile:
    states = solve_rankine_hugoniot(v_plus, u_plus, gas)
    return compute_profile(states, gas, half_width=half_width, resolution=resolution)


def build_profile(config: ExperimentConfig) -> ShockProfile:
    """Profile for the config's gas and right state; shared between runs with identical inputs."""
    return _cached_profile(config.gas, config.v_plus, config.u_plus, config.half_width, config.resolution)


def output_times(config: ExperimentConfig) -> np.ndarray:
    """Output instants ``0, dT, 2 dT, ...`` ending exactly at ``t_final``."""
    k = max(1, int(math.ceil(config.t_final / config.output_interval - 1e-9)))
    times = np.minimum(np.arange(k + 1) * config.output_interval, config.t_final)
    times[-1] = config.t_final
    extra = [t for t in config.snapshots if t not in times]
    return np.unique(np.concatenate([times, extra]))


def run(config: ExperimentConfig, profile: ShockProfile | None = None) -> DiagnosticsRecord:
    """Integrate the config to ``t_final`` and record diagnostics at every output time.

    A blow-up stops the run early; the record then has ``complete = False``
    and the failure message under ``meta["error"]``.
    """
    gas = config.gas
    profile = profile or build_profile(config)
    states = profile.states
    grid = config.grid()
    check_domain(grid, states, gas, config.beta, config.t_final)
    state = make_initial_data(config.initial, profile, grid)
    beta0 = compute_shift(state.v, grid.x, config.beta, profile)

    record = DiagnosticsRecord(meta={
        "config_hash": config.hash,
        "beta": config.beta,
        "beta0": beta0,
        "s": states.s,
        "v_minus": states.v_minus,
        "C_minus": profile.C_minus,
        "C_plus": profile.C_plus,
        "dx": grid.dx,
        "n": grid.n,
        "L": grid.L,
    })

    def shift(t):
        return states.s * t - beta0 + config.beta

    wanted = set(config.snapshots)
    record.append(state, profile, shift(0.0), gas, grid)
    if 0.0 in wanted:
        record.snapshots[0.0] = state
    steps = 0
    for t_next in output_times(config)[1:]:
        gap = t_next - state.t
        dt = stable_dt(state, gas, grid, config.cfl)
        nsteps = max(1, int(math.ceil(gap / dt)))
        try:
            state = advance(state, gap / nsteps, nsteps, gas, grid)
        except BlowUpError as exc:
            record.meta["error"] = str(exc)
            record.meta["steps"] = steps
            record.final_state = state
            record.complete = False
            return record
        steps += nsteps
        state = with_time(state, float(t_next))
        record.append(state, profile, shift(state.t), gas, grid)
        if t_next in wanted:
            record.snapshots[float(t_next)] = state
    record.meta["steps"] = steps
    record.final_state = state
    record.complete = True
    return record


def pure_state(profile: ShockProfile, x, shift: float, t: float = 0.0) -> FluidState:
    """Profile translate ``(V, U)(x - shift)`` as a solver state (no wall cutoff)."""
    V, U, _ = evaluate_profile(profile, np.asarray(x) - shift)
    return FluidState(t=t, v=V, u=U)
