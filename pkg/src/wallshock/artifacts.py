"""On-disk artifacts: fixed-precision CSV tables and JSON verdicts.

Every run lives in ``<root>/<config hash>/``:

``config.txt``          canonical configuration
``rh.json``             end states and residuals
``profile.csv``         ``xi,V,U,H``
``profile.json``        decay rates, ODE residual
``diagnostics.csv``     ``t,sup_error,E2,D,D_integral,mass_defect,boundary_trace``
``snapshot_final.csv``  ``x,v,u`` at ``t_final`` (plus ``snapshot_t<time>.csv`` if requested)
``summary.json``        run metadata and per-gate verdicts
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, serialize_config
from .diagnostics import DiagnosticsRecord
from .ibvp import FluidState, Grid1D
from .profile import ShockProfile

FLOAT_FMT = ".17g"


def _fmt(x) -> str:
    return format(float(x), FLOAT_FMT)


def write_csv(path, header, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c[i]) for c in cols) for i in range(len(cols[0])))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> dict[str, np.ndarray]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in row.split(",")] for row in text[1:] if row], dtype=float)
    data = data.reshape(-1, len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload) -> None:
    Path(path).write_text(json.dumps(to_jsonable(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def run_dir(root, config: ExperimentConfig) -> Path:
    path = Path(root) / config.hash
    path.mkdir(parents=True, exist_ok=True)
    (path / "config.txt").write_text(serialize_config(config), encoding="utf-8")
    return path


def write_profile(path, profile: ShockProfile) -> None:
    write_csv(path, ("xi", "V", "U", "H"), (profile.xi, profile.V, profile.U, profile.H))


def write_snapshot(path, state: FluidState, grid: Grid1D) -> None:
    write_csv(path, ("x", "v", "u"), (grid.x, state.v, state.u))


def snapshot_name(t: float) -> str:
    return f"snapshot_t{format(t, '.6g')}.csv"


def write_record(directory, record: DiagnosticsRecord, grid: Grid1D) -> None:
    directory = Path(directory)
    cols = [record.array(name) for name in DiagnosticsRecord.CSV_COLUMNS]
    write_csv(directory / "diagnostics.csv", DiagnosticsRecord.CSV_COLUMNS, cols)
    if record.final_state is not None:
        write_snapshot(directory / "snapshot_final.csv", record.final_state, grid)
    for t, state in record.snapshots.items():
        write_snapshot(directory / snapshot_name(t), state, grid)
