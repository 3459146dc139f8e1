"""Power-law gas, characteristic speeds and the 2-shock Rankine-Hugoniot solver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, NumericalError

_NEWTON_POLISH_STEPS = 5
_BISECTION_ITERATIONS = 200
_B_MISMATCH_TOL = 1e-10


@dataclass(frozen=True)
class GasModel:
    """Pressure law ``p = a v**-gamma`` and viscosity ``mu = v**-alpha`` (``mu0 = 1``)."""

    a: float = 1.0
    gamma: float = 1.4
    alpha: float = 0.0
    mu0: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise ConfigurationError("a must be positive")
        if not self.gamma > 1:
            raise ConfigurationError("gamma must exceed 1")
        if not self.alpha >= 0:
            raise ConfigurationError("alpha must be non-negative")
        if self.mu0 != 1.0:
            raise ConfigurationError("mu0 is fixed to 1")


@dataclass(frozen=True)
class ShockEndStates:
    v_minus: float
    v_plus: float
    u_minus: float
    u_plus: float
    s: float
    b: float

    @property
    def strength(self) -> float:
        return self.v_plus - self.v_minus


def pressure(v, gas: GasModel):
    """Return ``a * v**-gamma``; works on scalars and arrays."""
    if _any_nonpositive(v):
        raise DomainError("pressure requires v > 0")
    return gas.a * v ** (-gas.gamma)


def pressure_derivative(v, gas: GasModel):
    """Return ``dp/dv = -a gamma v**(-gamma-1)``, always negative."""
    if _any_nonpositive(v):
        raise DomainError("pressure_derivative requires v > 0")
    return -gas.a * gas.gamma * v ** (-gas.gamma - 1.0)


def sound_speed(v, gas: GasModel):
    """Lagrangian characteristic speed ``sqrt(-p'(v))``."""
    return (-pressure_derivative(v, gas)) ** 0.5


def pressure_jump(v, w, gas: GasModel):
    """``p(v + w) - p(v)`` without cancellation for small ``w``."""
    return gas.a * v ** (-gas.gamma) * np.expm1(-gas.gamma * np.log1p(w / v))


def rh_residuals(states: ShockEndStates, gas: GasModel) -> tuple[float, float]:
    """Both jump conditions of the p-system evaluated at ``states``."""
    s = states.s
    du = states.u_plus - states.u_minus
    r1 = -s * (states.v_plus - states.v_minus) - du
    r2 = -s * du + (pressure(states.v_plus, gas) - pressure(states.v_minus, gas))
    return r1, r2


def _hugoniot_gap(v: float, v_plus: float, u_plus: float, gas: GasModel) -> float:
    # strictly decreasing on (0, v_plus)
    return (pressure(v, gas) - pressure(v_plus, gas)) * (v_plus - v) - u_plus**2


def solve_rankine_hugoniot(v_plus: float, u_plus: float, gas: GasModel) -> ShockEndStates:
    """Find the left state ``(v_minus, 0)`` joined to ``(v_plus, u_plus)`` by an outgoing 2-shock.

    Bisection on ``(eps, v_plus - eps)`` with ``eps = 1e-12 v_plus`` followed by
    a short Newton polish. The constant ``b`` of the profile ODE is computed
    from both end states and must agree.
    """
    if not v_plus > 0:
        raise ConfigurationError("v_plus must be positive")
    if not u_plus < 0:
        raise ConfigurationError("u_plus must be negative for an outgoing 2-shock")

    eps = 1e-12 * v_plus
    lo, hi = eps, v_plus - eps
    f_lo = _hugoniot_gap(lo, v_plus, u_plus, gas)
    f_hi = _hugoniot_gap(hi, v_plus, u_plus, gas)
    if not (f_lo > 0 > f_hi):
        raise NumericalError(
            f"no sign change of the Hugoniot gap on [{lo:.3e}, {hi:.17g}]: "
            f"F(lo)={f_lo:.3e}, F(hi)={f_hi:.3e}"
        )
    for _ in range(_BISECTION_ITERATIONS):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if _hugoniot_gap(mid, v_plus, u_plus, gas) > 0:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)

    dp_plus = pressure(v_plus, gas)
    for _ in range(_NEWTON_POLISH_STEPS):
        f = (pressure(v, gas) - dp_plus) * (v_plus - v) - u_plus**2
        df = pressure_derivative(v, gas) * (v_plus - v) - (pressure(v, gas) - dp_plus)
        if df == 0:
            break
        v_new = v - f / df
        if not (0 < v_new < v_plus):
            break
        v = v_new

    s = -u_plus / (v_plus - v)
    b = -(s**2) * v_plus - pressure(v_plus, gas)
    b_minus = -(s**2) * v - pressure(v, gas)
    if abs(b - b_minus) > _B_MISMATCH_TOL * max(1.0, abs(b)):
        raise NumericalError(f"profile constant mismatch between end states: {b!r} vs {b_minus!r}")
    return ShockEndStates(v_minus=v, v_plus=v_plus, u_minus=0.0, u_plus=u_plus, s=s, b=b)


def lax_margins(states: ShockEndStates, gas: GasModel) -> tuple[float, float]:
    """``(s - c(v_plus), c(v_minus) - s)``; both positive for an admissible 2-shock."""
    return states.s - sound_speed(states.v_plus, gas), sound_speed(states.v_minus, gas) - states.s


def _any_nonpositive(v) -> bool:
    try:
        return bool((v <= 0).any())
    except AttributeError:
        return not v > 0
