"""Command line entry point: ``wallshock {rh,profile,simulate,sweep,verify}``.

Outputs go to ``<out>/<config hash>/``; ``--out`` defaults to ``$WALLSHOCK_OUTPUT``
or ``./runs``. Failures print ``{"error": ..., "message": ...}`` on stderr and
exit with status 2 (status 1 from ``verify`` means a gate failed).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import artifacts
from .config import DEFAULT_OUTPUT, OUTPUT_ENV, ExperimentConfig, load_config
from .errors import WallShockError
from .gas import lax_margins, rh_residuals, solve_rankine_hugoniot
from .profile import fit_decay
from .simulate import build_profile, run
from .verdicts import run_gates, verify_directory

SWEEP_COLUMNS = ("config_hash", "gamma", "alpha", "u_plus", "v_plus", "beta", "strength",
                 "sup_error_ratio", "energy_ratio", "passed", "failed_gates", "error")


def _out_root(args) -> Path:
    return Path(args.out or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)


def _load(path, seed: int | None) -> ExperimentConfig:
    config = load_config(path)
    if seed is not None:
        config = config.replace(initial__seed=seed)
    return config


def rh_payload(config: ExperimentConfig) -> dict:
    states = solve_rankine_hugoniot(config.v_plus, config.u_plus, config.gas)
    r1, r2 = rh_residuals(states, config.gas)
    lp, lm = lax_margins(states, config.gas)
    return {
        "v_minus": states.v_minus, "v_plus": states.v_plus,
        "u_minus": states.u_minus, "u_plus": states.u_plus,
        "s": states.s, "b": states.b, "strength": states.strength,
        "residual_mass": r1, "residual_momentum": r2,
        "lax_margin_plus": lp, "lax_margin_minus": lm,
    }


def do_rh(config: ExperimentConfig, root: Path) -> dict:
    payload = rh_payload(config)
    artifacts.write_json(artifacts.run_dir(root, config) / "rh.json", payload)
    return payload


def do_profile(config: ExperimentConfig, root: Path) -> dict:
    profile = build_profile(config)
    directory = artifacts.run_dir(root, config)
    artifacts.write_profile(directory / "profile.csv", profile)
    fit_minus, fit_plus = fit_decay(profile)
    payload = {
        "C_minus": profile.C_minus, "C_plus": profile.C_plus,
        "fitted_C_minus": fit_minus, "fitted_C_plus": fit_plus,
        "ode_residual": profile.ode_residual,
        "half_width": profile.half_width, "dxi": profile.dxi, "points": int(profile.xi.size),
    }
    artifacts.write_json(directory / "profile.json", payload)
    return payload


def do_simulate(config: ExperimentConfig, root: Path) -> dict:
    directory = artifacts.run_dir(root, config)
    artifacts.write_json(directory / "rh.json", rh_payload(config))
    do_profile(config, root)
    record = run(config)
    artifacts.write_record(directory, record, config.grid())
    gates = run_gates(config, record)
    summary = {
        "config_hash": config.hash,
        "complete": record.complete,
        "meta": record.meta,
        "passed": all(g.passed for g in gates),
        "gates": [g.as_dict() for g in gates],
    }
    artifacts.write_json(directory / "summary.json", summary)
    return summary


def _sweep_row(config: ExperimentConfig, root: Path) -> dict:
    row = {
        "config_hash": config.hash, "gamma": config.gas.gamma, "alpha": config.gas.alpha,
        "u_plus": config.u_plus, "v_plus": config.v_plus, "beta": config.beta,
        "strength": "", "sup_error_ratio": "", "energy_ratio": "", "passed": False,
        "failed_gates": "", "error": "",
    }
    try:
        summary = do_simulate(config, root)
    except WallShockError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    directory = root / config.hash
    row["strength"] = artifacts.read_json(directory / "rh.json")["strength"]
    gates = {g["name"]: g for g in summary["gates"]}
    if summary["complete"]:
        e = artifacts.read_csv(directory / "diagnostics.csv")["sup_error"]
        row["sup_error_ratio"] = float(e[-1] / e.max()) if e.max() > 0 else 0.0
    if "energy_bound" in gates:
        row["energy_ratio"] = gates["energy_bound"]["value"]
    row["passed"] = summary["passed"]
    row["failed_gates"] = " ".join(name for name, g in gates.items() if not g["passed"])
    row["error"] = summary["meta"].get("error", "")
    return row


def _format_cell(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def expand_sweep(configs: list[ExperimentConfig], vary: list[str]) -> list[ExperimentConfig]:
    """Cartesian product of ``--vary key=[v1, v2, ...]`` over every base config."""
    axes = []
    for item in vary:
        key, _, raw = item.partition("=")
        values = json.loads(raw)
        if not isinstance(values, list) or not values:
            raise ValueError(f"--vary {key}: expected a non-empty JSON list")
        axes.append((key.strip(), values))
    out = []
    for base in configs:
        for combo in itertools.product(*(vals for _, vals in axes)):
            out.append(base.updated({key: value for (key, _), value in zip(axes, combo)}))
    return out


def do_sweep(configs: list[ExperimentConfig], root: Path, jobs: int | None) -> list[dict]:
    unique = {c.hash: c for c in configs}
    jobs = jobs or os.cpu_count() or 1
    if jobs == 1 or len(unique) == 1:
        rows = {h: _sweep_row(c, root) for h, c in unique.items()}
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {h: pool.submit(_sweep_row, c, root) for h, c in unique.items()}
            rows = {h: f.result() for h, f in futures.items()}
    ordered = [rows[c.hash] for c in sorted(configs, key=lambda c: c.hash)]
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in ordered:
            writer.writerow([_format_cell(row[k]) for k in SWEEP_COLUMNS])
    return ordered


def print_gate_table(results, stream=None) -> None:
    stream = stream or sys.stdout
    width = max([len(label) for label, _ in results] + [3])
    stream.write(f"{'run':<{width}}  {'gate':<20}  {'verdict':<7}  {'value':>12}  threshold\n")
    for label, gate in results:
        verdict = "PASS" if gate.passed else "FAIL"
        stream.write(f"{label:<{width}}  {gate.name:<20}  {verdict:<7}  {gate.value:>12.5g}  {gate.threshold}\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wallshock", description="Viscous shock profiles next to a wall.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, many=False):
        if many:
            p.add_argument("--config", action="append", required=True, metavar="PATH", help="config file (repeatable)")
        else:
            p.add_argument("--config", required=True, metavar="PATH", help="config file")
        p.add_argument("--out", metavar="DIR", help=f"output root (default ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
        p.add_argument("--seed", type=int, metavar="K", help="override initial.seed")

    common(sub.add_parser("rh", help="solve the jump conditions"))
    common(sub.add_parser("profile", help="tabulate the viscous profile"))
    common(sub.add_parser("simulate", help="run the wall problem and record diagnostics"))
    sweep = sub.add_parser("sweep", help="run many configs, one CSV row each")
    common(sweep, many=True)
    sweep.add_argument("--vary", action="append", default=[], metavar="KEY=LIST",
                       help='sweep axis, e.g. shock.u_plus=[-0.1,-1,-3] (repeatable)')
    sweep.add_argument("--jobs", type=int, metavar="N", help="worker processes (default: CPU count)")
    verify = sub.add_parser("verify", help="evaluate gates over an artifact directory")
    verify.add_argument("directory", nargs="?", help="artifact root (default: the output root)")
    verify.add_argument("--out", metavar="DIR", help=argparse.SUPPRESS)
    return parser


def _fail(exc: Exception) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
    return 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            results = verify_directory(args.directory or _out_root(args))
            print_gate_table(results)
            failed = sorted({g.name for _, g in results if not g.passed})
            if failed:
                sys.stdout.write(f"FAILED gates: {', '.join(failed)}\n")
                return 1
            sys.stdout.write("all gates PASS\n")
            return 0
        root = _out_root(args)
        if args.command == "sweep":
            configs = expand_sweep([_load(p, args.seed) for p in args.config], args.vary)
            rows = do_sweep(configs, root, args.jobs)
            json.dump({"rows": len(rows), "table": str(root / "sweep.csv"),
                       "passed": sum(bool(r["passed"]) for r in rows)}, sys.stdout)
            sys.stdout.write("\n")
            return 0
        config = _load(args.config, args.seed)
        handler = {"rh": do_rh, "profile": do_profile, "simulate": do_simulate}[args.command]
        payload = handler(config, root)
        sys.stdout.write(json.dumps(artifacts.to_jsonable(payload), sort_keys=True) + "\n")
        if args.command == "simulate" and not payload["complete"]:
            return _fail(RuntimeError(payload["meta"].get("error", "run aborted")))
        return 0
    except (WallShockError, ValueError, OSError) as exc:
        return _fail(exc)


if __name__ == "__main__":
    sys.exit(main())
