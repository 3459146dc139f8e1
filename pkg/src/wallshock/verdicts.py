"""Pass/fail gates computed from runs and from artifacts on disk."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .artifacts import read_csv, read_json
from .config import ExperimentConfig, load_config
from .diagnostics import DiagnosticsRecord, energy_report, fit_exponential_rate
from .errors import IncompleteRecordError, MissingArtifactsError

SUP_RATIO_MAX = 0.2
MASS_RATIO_MAX = 0.1
MASS_ABS_TOL = 1e-8
D_TAIL_MAX = 0.01
TRACE_RATE_RTOL = 0.25
RH_TOL = 1e-10
PROFILE_TOL = 1e-8
ORDER_RANGE = (1.7, 2.3)
# a boundary-trace fit needs the trace to fall by at least this many e-folds
TRACE_MIN_EFOLDS = 2.0
# and to stay above roundoff while doing so
TRACE_FLOOR = 1e-12


@dataclass(frozen=True)
class Gate:
    name: str
    passed: bool
    value: float
    threshold: str
    note: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


def sup_ratio(record: DiagnosticsRecord) -> float:
    e = record.array("sup_error")
    return float(e[-1] / e.max()) if e.max() > 0 else 0.0


def boundary_trace_rate(record: DiagnosticsRecord) -> float:
    """Fitted exponential decay rate of ``|phi(0, t)|`` over the second half of the run."""
    return fit_exponential_rate(record.array("t"), record.array("boundary_trace"))[1]


def run_gates(config: ExperimentConfig, record: DiagnosticsRecord) -> list[Gate]:
    """Gates that apply to one simulation.

    Perturbed runs get the stability gates (sup-error decay, mass defect,
    energy bound, dissipation tail). Pure-profile runs long enough for the
    boundary trace to decay, while staying above ``TRACE_FLOOR``, get the
    trace-rate gate.
    """
    gates = [Gate("complete", record.complete, float(record.complete), "run reached t_final",
                  record.meta.get("error", ""))]
    if not record.complete:
        return gates
    meta = record.meta
    if config.initial.kind != "pure-profile" and config.initial.amplitude > 0:
        ratio = sup_ratio(record)
        gates.append(Gate("sup_error_decay", ratio <= SUP_RATIO_MAX, ratio, f"e(T)/max e <= {SUP_RATIO_MAX}"))
        m = record.array("mass_defect")
        bound = MASS_RATIO_MAX * abs(m[0]) + MASS_ABS_TOL
        gates.append(Gate("mass_defect", abs(m[-1]) <= bound, float(abs(m[-1])),
                          f"|m(T)| <= 0.1 |m(0)| + 1e-8 = {bound:.3e}"))
        try:
            rep = energy_report(record, config.beta, meta["C_minus"])
        except IncompleteRecordError as exc:
            gates.append(Gate("energy_bound", False, math.nan, "complete record", str(exc)))
        else:
            gates.append(Gate("energy_bound", rep.passed, rep.ratio, "R finite, late E2 trend non-increasing",
                              "; ".join(rep.reasons)))
            gates.append(Gate("dissipation_tail", rep.d_tail_ratio < D_TAIL_MAX, rep.d_tail_ratio,
                              f"D(T)/max D < {D_TAIL_MAX}"))
    else:
        target = meta["C_minus"] * meta["s"]
        trace0 = record.array("boundary_trace")[0]
        measurable = trace0 * math.exp(-target * config.t_final) >= TRACE_FLOOR
        if target * config.t_final >= 2 * TRACE_MIN_EFOLDS and measurable:
            rate = boundary_trace_rate(record)
            err = abs(rate / target - 1.0)
            gates.append(Gate("boundary_trace_rate", err <= TRACE_RATE_RTOL, rate,
                              f"within 25% of C_minus s = {target:.6g}"))
    return gates


def rh_gates(rh: dict) -> list[Gate]:
    worst = max(abs(rh["residual_mass"]), abs(rh["residual_momentum"]))
    lax = rh["lax_margin_minus"] > 0 and rh["lax_margin_plus"] > 0
    ordered = 0 < rh["v_minus"] < rh["v_plus"]
    return [
        Gate("rh_residuals", worst <= RH_TOL, worst, f"<= {RH_TOL}"),
        Gate("rh_lax", lax and ordered, float(lax and ordered), "c(v+) < s < c(v-), 0 < v- < v+"),
    ]


def profile_gates(info: dict, V: np.ndarray | None = None) -> list[Gate]:
    gates = [Gate("profile_residual", info["ode_residual"] <= PROFILE_TOL, info["ode_residual"], f"<= {PROFILE_TOL}")]
    if V is not None:
        increasing = bool(np.all(np.diff(V) > 0))
        gates.append(Gate("profile_monotone", increasing, float(increasing), "V strictly increasing"))
    return gates


def convergence_order(snapshots: list[tuple[int, np.ndarray, np.ndarray]]) -> float:
    """Observed order from three final snapshots on grids ``n, 2n, 4n``.

    Each entry is ``(n, v, u)``; differences are taken at the coarse nodes.
    """
    snaps = sorted(snapshots, key=lambda s: s[0])[:3]
    if len(snaps) < 3 or snaps[1][0] != 2 * snaps[0][0] or snaps[2][0] != 2 * snaps[1][0]:
        raise ValueError("need three grids with n, 2n, 4n nodes")
    (_, v0, u0), (_, v1, u1), (_, v2, u2) = snaps
    e01 = max(np.max(np.abs(v0 - v1[::2])), np.max(np.abs(u0 - u1[::2])))
    e12 = max(np.max(np.abs(v1[::2] - v2[::4])), np.max(np.abs(u1[::2] - u2[::4])))
    if e12 == 0:
        return math.inf
    return math.log2(e01 / e12)


def _grid_free_key(config: ExperimentConfig) -> str:
    flat = config.to_flat()
    flat.pop("grid.n")
    flat.pop("paths.output")
    return repr(sorted(flat.items()))


def verify_directory(root) -> list[tuple[str, Gate]]:
    """Evaluate every gate the artifacts under ``root`` provide inputs for."""
    root = Path(root)
    if not root.is_dir():
        raise MissingArtifactsError(f"no artifacts: {root} is not a directory")
    runs = sorted(p for p in root.iterdir() if (p / "config.txt").is_file())
    if not runs:
        raise MissingArtifactsError(f"no artifacts in {root}: expected <hash>/config.txt run directories")
    results: list[tuple[str, Gate]] = []
    groups: dict[str, list] = {}
    for path in runs:
        label = path.name
        found = False
        if (path / "rh.json").is_file():
            found = True
            results.extend((label, g) for g in rh_gates(read_json(path / "rh.json")))
        if (path / "profile.json").is_file():
            found = True
            V = read_csv(path / "profile.csv")["V"] if (path / "profile.csv").is_file() else None
            results.extend((label, g) for g in profile_gates(read_json(path / "profile.json"), V))
        if (path / "summary.json").is_file():
            found = True
            summary = read_json(path / "summary.json")
            for g in summary["gates"]:
                results.append((label, Gate(**g)))
            snap = path / "snapshot_final.csv"
            if summary.get("complete") and snap.is_file():
                config = load_config(path / "config.txt")
                data = read_csv(snap)
                groups.setdefault(_grid_free_key(config), []).append((config.grid_n, data["v"], data["u"], label))
        if not found:
            missing = "rh.json, profile.json or summary.json"
            raise MissingArtifactsError(f"run directory {path} has a config but none of {missing}")
    for members in groups.values():
        ns = sorted(m[0] for m in members)
        for n in ns:
            if 2 * n in ns and 4 * n in ns:
                trio = [m for m in members if m[0] in (n, 2 * n, 4 * n)]
                order = convergence_order([(m[0], m[1], m[2]) for m in trio])
                lo, hi = ORDER_RANGE
                label = "+".join(m[3] for m in sorted(trio, key=lambda m: m[0]))
                results.append((label, Gate("convergence_order", lo <= order <= hi, order,
                                            f"in [{lo}, {hi}] (n = {n}, {2 * n}, {4 * n})")))
    return results
