"""Viscous shock profiles of the isentropic Navier-Stokes p-system and their
stability next to an impermeable wall, computed numerically."""

from .config import ExperimentConfig, load_config, parse_config, serialize_config
from .diagnostics import (
    DiagnosticsRecord,
    EnergyReport,
    PerturbationFields,
    anti_derivative,
    compute_perturbations,
    effective_velocity,
    energy_report,
    fit_exponential_rate,
    mass_defect,
    sobolev_norms,
    sup_error,
)
from .errors import (
    BlowUpError,
    ConfigurationError,
    DomainError,
    IncompleteRecordError,
    InsufficientTailError,
    MissingArtifactsError,
    NumericalError,
    ProfileRefinementError,
    TruncationWarning,
    WallShockError,
)
from .gas import (
    GasModel,
    ShockEndStates,
    lax_margins,
    pressure,
    pressure_derivative,
    rh_residuals,
    solve_rankine_hugoniot,
    sound_speed,
)
from .ibvp import FluidState, Grid1D, InitialDataSpec, advance, make_initial_data, rhs_semi_discrete, stable_dt, step
from .profile import (
    ShockProfile,
    compute_profile,
    compute_shift,
    decay_rates,
    evaluate_profile,
    fit_decay,
    profile_rhs,
)
from .simulate import build_profile, run

__version__ = "0.1.0"
