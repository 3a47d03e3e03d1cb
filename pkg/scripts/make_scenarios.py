"""Write the shipped scenario files.

``scenarios/worked_example.json`` holds the thermostat stroke with switches at
t=2 and t=6 (period 7) moving the swimmer by 1, as an inline control with
full-precision switch angles. The other files are synthesis requests.
"""

import json
import math
from pathlib import Path

from scallop_switch import Regime, ScallopParams, State, Thermostat, plan_displacement, realize_plan

ROOT = Path(__file__).resolve().parents[1] / "scenarios"


def dump(name, obj):
    (ROOT / name).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    print("wrote", ROOT / name)


def main():
    ROOT.mkdir(exist_ok=True)
    p = ScallopParams()
    rule = Thermostat(0.1)
    theta0, u0 = math.pi / 4, 5 * rule.eps
    plans = plan_displacement(p, rule, State(0.0, theta0, Regime.IDEAL), u0, 1.0, 7.0)
    sig = realize_plan(plans, "smooth")
    base = {
        "params": {"a": p.a, "b": p.b, "xi": p.xi, "eta": p.eta, "m": p.m, "rho": p.rho},
        "rule": rule.to_dict(),
    }
    control = sig.to_dict()
    control["kind"] = "smooth"
    control["periodic"] = True
    dump("worked_example.json", {**base, "initial": {"x0": 0.0, "w0": 2}, "control": control})
    dump("synth_worked_example.json", {
        **base,
        "initial": {"x0": 0.0, "theta0": theta0, "u0": u0, "w0": 2},
        "synthesis": {"target_dx": 1.0, "T": 7.0, "kind": "smooth"},
    })
    dump("synth_backward.json", {
        **base,
        "initial": {"x0": 0.0, "theta0": theta0, "u0": u0, "w0": 2},
        "synthesis": {"target_dx": -0.5, "T": 7.0, "kind": "smooth"},
    })
    dump("transfer.json", {
        **base,
        "initial": {"x0": 0.0, "theta0": theta0, "u0": u0, "w0": 2},
        "synthesis": {"target": {"xf": 2.0, "thetaf": 1.2}, "T": 7.0, "kind": "smooth"},
    })
    dump("sign_backward.json", {
        **base,
        "rule": {"type": "sign"},
        "initial": {"x0": 0.0, "theta0": theta0, "u0": u0},
        "synthesis": {"target_dx": -0.5, "T": 7.0, "kind": "smooth"},
    })


if __name__ == "__main__":
    main()
