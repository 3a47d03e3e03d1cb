"""Thermostat stroke of period 7 with switches at t=2 and t=6 moving by 1.

Prints the switch angles, the exact and RK4 displacements for the smooth and
the piecewise-constant realization, and the runtime.
"""

import math
import time

from scallop_switch import Regime, ScallopParams, State, Thermostat, plan_displacement, realize_plan
from scallop_switch.simulate import propagate_exact, propagate_numeric


def main():
    t0 = time.perf_counter()
    p = ScallopParams()
    rule = Thermostat(0.1)
    s0 = State(0.0, math.pi / 4, Regime.IDEAL)
    (plan,) = plan_displacement(p, rule, s0, 0.5, 1.0, 7.0)
    print("switch times ", plan.switch_times)
    print("switch angles", plan.switch_angles)
    for kind in ("smooth", "pwc"):
        sig = realize_plan([plan], kind)
        ex = propagate_exact(p, rule, sig, s0)
        nu = propagate_numeric(p, rule, sig, s0, h=1e-3)
        print(f"{kind:6s} events={[round(e.t, 9) for e in ex.events]} exact={ex.delta_x!r} rk4={nu.delta_x!r}")
    print(f"runtime {time.perf_counter() - t0:.3f} s")


if __name__ == "__main__":
    main()
