"""Walk through the stationary ingredients of the wall problem.

1. Solve the jump conditions for an outgoing shock and check admissibility.
2. Tabulate the viscous profile and compare its tails with the linearized rates.
3. Show how the asymptotic shift selected by the wall shrinks as the shock starts farther away.

Run with ``python demos/01_profile_and_shift.py``.
"""

import math

import numpy as np

from wallshock import GasModel, compute_profile, solve_rankine_hugoniot
from wallshock.gas import lax_margins, rh_residuals
from wallshock.profile import boundary_flux_integral, evaluate_profile, fit_decay


def main():
    gas = GasModel(a=1.0, gamma=1.4, alpha=0.0)
    print("Jump conditions for v+ = 1 and several wall speeds u+")
    print(f"{'u+':>6} {'v-':>10} {'s':>10} {'strength':>10} {'max residual':>13} {'Lax margins':>22}")
    for u_plus in (-0.1, -0.5, -1.0, -3.0, -5.0):
        st = solve_rankine_hugoniot(1.0, u_plus, gas)
        r = max(abs(x) for x in rh_residuals(st, gas))
        lp, lm = lax_margins(st, gas)
        print(f"{u_plus:6.1f} {st.v_minus:10.6f} {st.s:10.6f} {st.strength:10.6f} {r:13.1e} {lp:10.4f} {lm:10.4f}")

    states = solve_rankine_hugoniot(1.0, -0.5, gas)
    prof = compute_profile(states, gas)
    fit_minus, fit_plus = fit_decay(prof)
    print("\nProfile for u+ = -0.5")
    print(f"  table: {prof.xi.size} points, dxi = {prof.dxi:.4g}, ODE residual {prof.ode_residual:.2e}")
    print(f"  left tail rate  {fit_minus:.6f} (linearized {prof.C_minus:.6f})")
    print(f"  right tail rate {fit_plus:.6f} (linearized {prof.C_plus:.6f})")
    for xi in (-10.0, -2.0, 0.0, 2.0, 10.0):
        V, U, _ = evaluate_profile(prof, xi)
        print(f"  xi = {xi:6.1f}: V = {V:.10f}  U = {U:.10f}")

    print("\nWall-induced shift for pure profile data placed at distance beta")
    print("(the mass that leaks through the wall is the profile's left tail, so it falls like exp(-C_minus beta))")
    previous = None
    for beta in (5.0, 10.0, 15.0, 20.0):
        shift = boundary_flux_integral(beta, prof) / states.strength
        note = ""
        if previous is not None:
            note = f"  ratio {shift / previous:.4e} vs exp(-5 C_minus) = {math.exp(-5 * prof.C_minus):.4e}"
        print(f"  beta = {beta:5.1f}: beta0 = {shift: .6e}{note}")
        previous = shift

    x = np.linspace(0.0, 60.0, 6001)
    V = evaluate_profile(prof, x - 20.0)[0]
    print(f"\nAt the wall the profile sits {abs(V[0] - states.v_minus):.2e} away from v- for beta = 20")


if __name__ == "__main__":
    main()
