"""Experiment configuration: a flat ``section.key = value`` document.

Values are JSON literals (numbers, quoted strings, ``true``/``false``,
``null``, lists); a bare word is read as a string. ``#`` starts a comment.
Example::

    gas.gamma = 1.4
    shock.v_plus = 1.0
    shock.u_plus = -0.1
    initial.beta = 30
    initial.kind = "bump"
    initial.amplitude = 0.05
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import warnings
from dataclasses import dataclass, field

from .errors import ConfigurationError
from .gas import GasModel, solve_rankine_hugoniot
from .ibvp import DEFAULT_CFL, MIN_CELLS, Grid1D, InitialDataSpec, check_domain
from .profile import decay_rates

OUTPUT_ENV = "WALLSHOCK_OUTPUT"
DEFAULT_OUTPUT = "runs"
DEFAULT_T_FINAL = 10.0
DEFAULT_OUTPUTS = 200
DOMAIN_EFOLDS = 30.0

REQUIRED = ("gas.gamma", "shock.v_plus", "shock.u_plus", "initial.beta")
KEYS = (
    "gas.a", "gas.gamma", "gas.alpha",
    "shock.v_plus", "shock.u_plus",
    "initial.beta", "initial.kind", "initial.amplitude", "initial.support_lo",
    "initial.support_hi", "initial.seed",
    "grid.length", "grid.n",
    "time.t_final", "time.cfl", "time.output_interval", "time.snapshots",
    "profile.half_width", "profile.resolution",
    "paths.output",
)
# output location does not change results, so it stays out of the hash
_UNHASHED = ("paths.output",)


@dataclass(frozen=True)
class ExperimentConfig:
    gas: GasModel
    v_plus: float
    u_plus: float
    initial: InitialDataSpec
    grid_length: float
    grid_n: int
    t_final: float
    cfl: float
    output_interval: float
    half_width: float | None
    resolution: float | None
    snapshots: tuple[float, ...] = ()
    output_dir: str = field(default=DEFAULT_OUTPUT, compare=False)
    # keys the user set; the rest were derived and are re-derived by replace()
    explicit: frozenset = field(default=frozenset(), compare=False)

    @property
    def beta(self) -> float:
        return self.initial.beta

    def grid(self) -> Grid1D:
        return Grid1D.uniform(self.grid_length, self.grid_n)

    def to_flat(self) -> dict:
        support = self.initial.support or (None, None)
        return {
            "gas.a": self.gas.a,
            "gas.gamma": self.gas.gamma,
            "gas.alpha": self.gas.alpha,
            "shock.v_plus": self.v_plus,
            "shock.u_plus": self.u_plus,
            "initial.beta": self.initial.beta,
            "initial.kind": self.initial.kind,
            "initial.amplitude": self.initial.amplitude,
            "initial.support_lo": support[0],
            "initial.support_hi": support[1],
            "initial.seed": self.initial.seed,
            "grid.length": self.grid_length,
            "grid.n": self.grid_n,
            "time.t_final": self.t_final,
            "time.cfl": self.cfl,
            "time.output_interval": self.output_interval,
            "time.snapshots": list(self.snapshots),
            "profile.half_width": "auto" if self.half_width is None else self.half_width,
            "profile.resolution": "auto" if self.resolution is None else self.resolution,
            "paths.output": self.output_dir,
        }

    @property
    def hash(self) -> str:
        flat = {k: v for k, v in self.to_flat().items() if k not in _UNHASHED}
        canon = json.dumps(flat, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    def user_flat(self) -> dict:
        """The explicitly set keys only, so derived defaults follow later overrides."""
        return {k: v for k, v in self.to_flat().items() if k in self.explicit}

    def replace(self, **flat_updates) -> "ExperimentConfig":
        """New config with dotted keys overridden (``grid__n=128`` style keywords)."""
        return self.updated({key.replace("__", "."): value for key, value in flat_updates.items()})

    def updated(self, overrides: dict) -> "ExperimentConfig":
        flat = self.user_flat()
        flat.update(overrides)
        return from_mapping(flat)


def _parse_value(raw: str, key: str):
    raw = raw.strip()
    if not raw:
        raise ConfigurationError(f"missing value for key {key!r}")
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        if any(c in raw for c in "\"'[]{},"):
            raise ConfigurationError(f"malformed value for key {key!r}: {raw}") from None
        return raw


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document, filling defaults."""
    flat = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip() if '"' not in line else _strip_comment(line)
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected 'key = value'")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key in flat:
            raise ConfigurationError(f"duplicate key {key!r}")
        flat[key] = _parse_value(raw, key)
    return from_mapping(flat)


def _strip_comment(line: str) -> str:
    quoted = False
    for i, c in enumerate(line):
        if c == '"':
            quoted = not quoted
        elif c == "#" and not quoted:
            return line[:i].strip()
    return line.strip()


def _number(flat, key, default=None, kind=float):
    value = flat.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{key} must be a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigurationError(f"{key} must be an integer")
        return int(value)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{key} must be finite")
    return value


def _auto_or_positive(flat, key):
    value = flat.get(key, "auto")
    if value == "auto" or value is None:
        return None
    value = _number(flat, key)
    if not value > 0:
        raise ConfigurationError(f"{key} must be positive or \"auto\"")
    return value


def from_mapping(flat: dict) -> ExperimentConfig:
    unknown = sorted(set(flat) - set(KEYS))
    if unknown:
        raise ConfigurationError(f"unknown key {unknown[0]!r}")
    missing = [k for k in REQUIRED if flat.get(k) is None]
    if missing:
        raise ConfigurationError(f"missing required key {missing[0]!r}")

    gas = GasModel(
        a=_number(flat, "gas.a", 1.0),
        gamma=_number(flat, "gas.gamma"),
        alpha=_number(flat, "gas.alpha", 0.0),
    )
    v_plus = _number(flat, "shock.v_plus")
    u_plus = _number(flat, "shock.u_plus")
    if not v_plus > 0:
        raise ConfigurationError("shock.v_plus must be positive")
    if not u_plus < 0:
        raise ConfigurationError("shock.u_plus must be negative (outgoing 2-shock)")
    states = solve_rankine_hugoniot(v_plus, u_plus, gas)
    c_minus, c_plus = decay_rates(states, gas)

    lo = _number(flat, "initial.support_lo")
    hi = _number(flat, "initial.support_hi")
    if (lo is None) != (hi is None):
        raise ConfigurationError("initial.support_lo and initial.support_hi go together")
    kind = flat.get("initial.kind", "pure-profile")
    if not isinstance(kind, str):
        raise ConfigurationError("initial.kind must be a string")
    initial = InitialDataSpec(
        kind=kind,
        amplitude=_number(flat, "initial.amplitude", 0.0),
        support=None if lo is None else (lo, hi),
        seed=_number(flat, "initial.seed", 0, int),
        beta=_number(flat, "initial.beta"),
    )

    t_final = _number(flat, "time.t_final", DEFAULT_T_FINAL)
    if not t_final > 0:
        raise ConfigurationError("time.t_final must be positive")
    cfl = _number(flat, "time.cfl", DEFAULT_CFL)
    if not 0 < cfl <= 2.0:
        raise ConfigurationError("time.cfl must lie in (0, 2]")
    if cfl > 1.0:
        warnings.warn(f"time.cfl={cfl} exceeds the linear stability limit 1", RuntimeWarning, stacklevel=2)
    interval = _number(flat, "time.output_interval", t_final / DEFAULT_OUTPUTS)
    if not 0 < interval <= t_final:
        raise ConfigurationError("time.output_interval must lie in (0, t_final]")
    snaps = flat.get("time.snapshots", [])
    if not isinstance(snaps, list) or not all(isinstance(s, (int, float)) for s in snaps):
        raise ConfigurationError("time.snapshots must be a list of times")
    if any(not 0 <= s <= t_final for s in snaps):
        raise ConfigurationError("time.snapshots must lie in [0, t_final]")

    length = _number(flat, "grid.length")
    auto_length = length is None
    if auto_length:
        length = initial.beta + states.s * t_final + DOMAIN_EFOLDS / min(c_minus, c_plus)
    n = _number(flat, "grid.n", None, int)
    if n is None:
        dx = min(0.25, 0.2 / max(c_minus, c_plus))
        n = max(MIN_CELLS, int(math.ceil(length / dx)))
    grid = Grid1D.uniform(length, n)
    check_domain(grid, states, gas, initial.beta, t_final)
    if not (0.1 * length < initial.beta < 0.9 * length):
        hint = f"; the automatic grid.length is {length:.6g}, so raise initial.beta or set grid.length" if auto_length else ""
        raise ConfigurationError(f"initial.beta must lie in (0.1 L, 0.9 L){hint}")
    if initial.support is not None and not (0 < lo < hi < length):
        raise ConfigurationError("initial support must satisfy 0 < support_lo < support_hi < grid.length")

    half_width = _auto_or_positive(flat, "profile.half_width")
    resolution = _auto_or_positive(flat, "profile.resolution")

    output = flat.get("paths.output") or os.environ.get(OUTPUT_ENV, DEFAULT_OUTPUT)
    return ExperimentConfig(
        gas=gas, v_plus=v_plus, u_plus=u_plus, initial=initial,
        grid_length=float(length), grid_n=n, t_final=t_final, cfl=cfl,
        output_interval=interval, half_width=half_width, resolution=resolution,
        snapshots=tuple(float(s) for s in snaps), output_dir=str(output),
        explicit=frozenset(k for k, v in flat.items() if v is not None),
    )


def serialize_config(config: ExperimentConfig) -> str:
    """Inverse of :func:`parse_config`; keys sorted, floats in shortest round-trip form."""
    lines = []
    for key, value in sorted(config.to_flat().items()):
        if value is None:
            continue
        lines.append(f"{key} = {json.dumps(value)}")
    return "\n".join(lines) + "\n"


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
