"""Perturb a shock next to the wall and watch it settle onto the shifted profile.

A mean-zero bump of height 0.05 is added to the specific volume around the
shock. The script prints the sup-norm distance to the shifted traveling wave,
the energy ``E2`` of the integrated perturbation and the dissipation ``D`` at a
few times, followed by the pass/fail gates.

``python demos/02_stability_runs.py`` runs the weak shock (about a second).
``python demos/02_stability_runs.py --strong`` adds the u+ = -3 case (about two minutes).
"""

import sys

from wallshock.config import from_mapping
from wallshock.simulate import run
from wallshock.verdicts import run_gates

CASES = {
    "weak shock, gamma = 1.4, u+ = -0.1": {
        "gas.gamma": 1.4, "shock.u_plus": -0.1,
        "grid.length": 260.0, "grid.n": 1040, "time.t_final": 110.0, "time.cfl": 0.4,
    },
    "strong shock, gamma = 5/3, u+ = -3": {
        "gas.gamma": 5.0 / 3.0, "shock.u_plus": -3.0,
        "grid.length": 299.0, "grid.n": 7475, "time.t_final": 65.0, "time.cfl": 0.8,
    },
}
COMMON = {"shock.v_plus": 1.0, "initial.beta": 30.0, "initial.kind": "bump", "initial.amplitude": 0.05}


def show(title, flat):
    config = from_mapping({**COMMON, **flat})
    record = run(config)
    meta = record.meta
    print(f"\n{title}")
    print(f"  v- = {meta['v_minus']:.6f}, s = {meta['s']:.6f}, beta0 = {meta['beta0']:.3e}, dx = {meta['dx']:.4g}")
    t = record.array("t")
    e, E2, D = record.array("sup_error"), record.array("E2"), record.array("D")
    print(f"  {'t':>8} {'sup error':>12} {'E2':>12} {'D':>12}")
    rows = sorted(set(range(0, t.size, max(1, t.size // 10))) | {t.size - 1})
    for i in rows:
        print(f"  {t[i]:8.2f} {e[i]:12.4e} {E2[i]:12.4e} {D[i]:12.4e}")
    for gate in run_gates(config, record):
        print(f"  {'PASS' if gate.passed else 'FAIL'}  {gate.name:<18} {gate.value:.4g}  ({gate.threshold})")


def main(argv):
    for index, (title, flat) in enumerate(CASES.items()):
        if index > 0 and "--strong" not in argv:
            print("\n(pass --strong to run the large-amplitude case)")
            break
        show(title, flat)


if __name__ == "__main__":
    main(sys.argv[1:])
