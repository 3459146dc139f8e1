"""Perturbation fields and energy functionals tracked along a run.

Everything is measured against the shifted profile ``V(x - total_shift)``
with ``total_shift = s t - beta0 + beta``. Anti-derivatives integrate from
the far boundary, where all perturbations vanish.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteRecordError, TruncationWarning
from .gas import GasModel, pressure
from .ibvp import FluidState, Grid1D
from .profile import ShockProfile, evaluate_profile

LOG_FLOOR = 1e-14


def ddx(f, grid: Grid1D):
    """Second-order central difference, one-sided second order at both ends (solver stencil)."""
    return np.gradient(f, grid.dx, edge_order=2)


def trapezoid(f, grid: Grid1D) -> float:
    return float(np.trapezoid(f, dx=grid.dx))


def anti_derivative(f, grid: Grid1D):
    """``F(x) = -int_x^L f``, composite trapezoid, so that ``F(L) = 0``."""
    f = np.asarray(f, dtype=float)
    scale = np.max(np.abs(f)) if f.size else 0.0
    if scale > 0 and abs(f[-1]) > 1e-8 * scale:
        warnings.warn(
            f"field has not decayed at x=L: |f(L)| / max|f| = {abs(f[-1]) / scale:.2e}",
            TruncationWarning,
            stacklevel=2,
        )
    panels = 0.5 * grid.dx * (f[1:] + f[:-1])
    out = np.zeros_like(f)
    out[:-1] = -np.cumsum(panels[::-1])[::-1]
    return out


def effective_velocity(state: FluidState, gas: GasModel, grid: Grid1D):
    """``h = u - v**-(alpha+1) v_x``."""
    v = np.asarray(state.v, dtype=float)
    if np.any(v <= 0):
        raise ValueError("specific volume must be positive")
    return state.u - v ** (-(gas.alpha + 1.0)) * ddx(v, grid)


@dataclass(frozen=True, eq=False)
class PerturbationFields:
    phi: np.ndarray
    psi: np.ndarray
    h_field: np.ndarray
    Psi: np.ndarray


def compute_perturbations(state: FluidState, profile: ShockProfile, total_shift: float,
                          gas: GasModel, grid: Grid1D) -> PerturbationFields:
    V, U, H = evaluate_profile(profile, grid.x - total_shift)
    h = effective_velocity(state, gas, grid)
    return PerturbationFields(
        phi=anti_derivative(state.v - V, grid),
        psi=anti_derivative(state.u - U, grid),
        h_field=h,
        Psi=anti_derivative(h - H, grid),
    )


def steady_wave_residual(V, U, dx: float, s: float, gas: GasModel) -> float:
    """Sup of ``-s H' + p(V)'`` for a traveling wave sampled with spacing ``dx``.

    ``H = U - V**-(alpha+1) V'`` is built with the solver stencil, so for an
    exact profile the result is pure truncation error, ``O(dx**2)``.
    """
    V = np.asarray(V, dtype=float)
    H = np.asarray(U, dtype=float) - V ** (-(gas.alpha + 1.0)) * np.gradient(V, dx, edge_order=2)
    r = -s * np.gradient(H, dx, edge_order=2) + np.gradient(pressure(V, gas), dx, edge_order=2)
    return float(np.max(np.abs(r)))


def sobolev_norm(f, grid: Grid1D, order: int = 0) -> float:
    """``(sum_{k<=order} ||d^k f||^2)^(1/2)`` with trapezoid L2 norms and finite differences."""
    if order not in (0, 1, 2, 3):
        raise ValueError("order must be 0, 1, 2 or 3")
    total = 0.0
    g = np.asarray(f, dtype=float)
    for k in range(order + 1):
        if k:
            g = ddx(g, grid)
        total += trapezoid(g * g, grid)
    return math.sqrt(total)


def sobolev_norms(fields: PerturbationFields, grid: Grid1D, order: int = 2) -> dict[str, float]:
    if order > 2:
        raise ValueError("order must not exceed 2")
    return {name: sobolev_norm(getattr(fields, name), grid, order) for name in ("phi", "psi", "Psi")}


def sup_error(state: FluidState, profile: ShockProfile, total_shift: float, grid: Grid1D) -> float:
    V, U, _ = evaluate_profile(profile, grid.x - total_shift)
    return float(np.max(np.abs(state.v - V) + np.abs(state.u - U)))


def mass_defect(state: FluidState, profile: ShockProfile, total_shift: float, grid: Grid1D) -> float:
    V, _, _ = evaluate_profile(profile, grid.x - total_shift)
    return trapezoid(state.v - V, grid)


def energy_terms(fields: PerturbationFields, grid: Grid1D) -> dict[str, float]:
    """Energy ``||phi||_2^2 + ||psi||_2^2`` and dissipation ``||phi_x||_1^2 + ||psi_x||_2^2``."""
    d = {}
    for name in ("phi", "psi", "Psi"):
        g = getattr(fields, name)
        sq = []
        for _ in range(4):
            sq.append(trapezoid(g * g, grid))
            g = ddx(g, grid)
        d[name] = sq
    phi, psi, Psi = d["phi"], d["psi"], d["Psi"]
    return {
        "E2": phi[0] + phi[1] + phi[2] + psi[0] + psi[1] + psi[2],
        "D": phi[1] + phi[2] + psi[1] + psi[2] + psi[3],
        "E1_Psi": phi[0] + phi[1] + Psi[0] + Psi[1],
        "phi_x_H1": math.sqrt(phi[1] + phi[2]),
    }


@dataclass
class DiagnosticsRecord:
    times: list = field(default_factory=list)
    sup_error: list = field(default_factory=list)
    E2: list = field(default_factory=list)
    D: list = field(default_factory=list)
    D_integral: list = field(default_factory=list)
    mass_defect: list = field(default_factory=list)
    boundary_trace: list = field(default_factory=list)
    E1_Psi: list = field(default_factory=list)
    psi_gap_ratio: list = field(default_factory=list)
    v_min: list = field(default_factory=list)
    v_max: list = field(default_factory=list)
    wall_u: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    complete: bool = False
    final_state: FluidState | None = None
    snapshots: dict = field(default_factory=dict)

    SERIES = ("sup_error", "E2", "D", "D_integral", "mass_defect", "boundary_trace",
              "E1_Psi", "psi_gap_ratio", "v_min", "v_max", "wall_u")
    CSV_COLUMNS = ("t", "sup_error", "E2", "D", "D_integral", "mass_defect", "boundary_trace")

    def __len__(self):
        return len(self.times)

    def array(self, name: str) -> np.ndarray:
        return np.asarray(self.times if name == "t" else getattr(self, name), dtype=float)

    def append(self, state: FluidState, profile: ShockProfile, total_shift: float,
               gas: GasModel, grid: Grid1D) -> None:
        with warnings.catch_warnings():
            # the transient boundary tail of u is legitimately non-zero at early times
            warnings.simplefilter("ignore", TruncationWarning)
            fields = compute_perturbations(state, profile, total_shift, gas, grid)
        terms = energy_terms(fields, grid)
        gap = sobolev_norm(fields.Psi - fields.psi, grid, 0)
        if self.times:
            dt = state.t - self.times[-1]
            running = self.D_integral[-1] + 0.5 * dt * (self.D[-1] + terms["D"])
        else:
            running = 0.0
        self.times.append(float(state.t))
        self.sup_error.append(sup_error(state, profile, total_shift, grid))
        self.E2.append(terms["E2"])
        self.D.append(terms["D"])
        self.D_integral.append(running)
        self.mass_defect.append(mass_defect(state, profile, total_shift, grid))
        self.boundary_trace.append(abs(float(fields.phi[0])))
        self.E1_Psi.append(terms["E1_Psi"])
        self.psi_gap_ratio.append(gap / terms["phi_x_H1"] if terms["phi_x_H1"] > 0 else 0.0)
        self.v_min.append(float(np.min(state.v)))
        self.v_max.append(float(np.max(state.v)))
        self.wall_u.append(float(state.u[0]))


def fit_exponential_rate(t, y, fraction: float = 0.5) -> tuple[float, float]:
    """Least-squares fit ``y ~ A exp(-rate t)`` over the last ``fraction`` of the samples.

    Returns ``(A, rate)``; ``y`` is floored at ``LOG_FLOOR`` before the logarithm.
    """
    t = np.asarray(t, dtype=float)
    y = np.maximum(np.abs(np.asarray(y, dtype=float)), LOG_FLOOR)
    start = int(len(t) * (1.0 - fraction))
    tt, ly = t[start:], np.log(y[start:])
    if len(tt) < 3:
        raise ValueError("need at least three samples to fit a rate")
    slope, intercept = np.polyfit(tt, ly, 1)
    return float(math.exp(intercept)), float(-slope)


@dataclass(frozen=True)
class EnergyReport:
    passed: bool
    ratio: float
    late_slope: float
    slope_tolerance: float
    d_tail_ratio: float
    reasons: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "R": self.ratio,
            "late_E2_slope": self.late_slope,
            "slope_tolerance": self.slope_tolerance,
            "D_tail_ratio": self.d_tail_ratio,
            "reasons": list(self.reasons),
        }


def late_trend(t, y, quartile: float = 0.25) -> float:
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    start = int(len(t) * (1.0 - quartile))
    return float(np.polyfit(t[start:], y[start:], 1)[0])


def energy_report(record: DiagnosticsRecord, beta: float, C_minus: float,
                  slope_rtol: float = 1e-3) -> EnergyReport:
    """Bound ratio ``R = max_t (E2 + int D) / (E2(0) + exp(-C_minus beta))`` and a late-time growth test.

    The last-quartile trend of ``E2`` counts as non-increasing when its slope,
    times the quartile duration, is below ``slope_rtol * max(E2)``.
    """
    if not record.complete:
        raise IncompleteRecordError("record is incomplete (run aborted); refusing to certify")
    t = record.array("t")
    E2 = record.array("E2")
    total = E2 + record.array("D_integral")
    denom = E2[0] + math.exp(-C_minus * beta)
    ratio = float(np.max(total) / denom)
    slope = late_trend(t, E2)
    span = t[-1] - t[int(len(t) * 0.75)]
    tol = slope_rtol * float(np.max(E2)) / span if span > 0 else 0.0
    D = record.array("D")
    d_tail = float(D[-1] / np.max(D)) if np.max(D) > 0 else 0.0
    reasons = []
    if not math.isfinite(ratio):
        reasons.append("R is not finite")
    if not np.all(E2 <= ratio * denom * (1 + 1e-12)):
        reasons.append("E2 exceeds R (E2(0) + exp(-C_minus beta))")
    if slope > tol:
        reasons.append(f"late-time E2 growth: slope {slope:.3e} > {tol:.3e}")
    return EnergyReport(passed=not reasons, ratio=ratio, late_slope=slope, slope_tolerance=tol,
                        d_tail_ratio=d_tail, reasons=tuple(reasons))
