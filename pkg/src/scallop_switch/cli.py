"""Command-line front end.

``simulate`` runs an inline control and ``synthesize`` plans one for a
requested displacement or transfer; ``verify`` runs the built-in property
suites. Scenarios are JSON (schema in the README).

Exit codes: 0 success, 1 failed verification, 2 infeasible synthesis,
3 domain violation, 4 parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .control import random_fourier_control, signal_from_dict
from .errors import (
    CoherenceError,
    DomainError,
    InfeasibleError,
    MissingHintError,
    RegularityError,
    ValidationError,
)
from .model import HALF_PI, Regime, RegularityWarning, ScallopParams, State, f_primitive, gap, velocity
from .simulate import propagate_exact, propagate_numeric
from .switching import Fixed, initial_regime, rule_from_dict
from .synthesize import plan_displacement, plan_transfer, predicted_total, realize_plan

EXIT_OK, EXIT_FAIL, EXIT_INFEASIBLE, EXIT_DOMAIN, EXIT_PARSE = 0, 1, 2, 3, 4


class ScenarioError(ValueError):
    """Malformed scenario file; the message names the offending field."""


@dataclass
class Output:
    samples: int = 701
    csv: str = "trajectory.csv"
    summary: str = "summary.json"
    plan: str = "plan.json"
    control: str = "control.json"


@dataclass
class Scenario:
    params: ScallopParams
    rule: object
    x0: float = 0.0
    theta0: Optional[float] = None
    u0: Optional[float] = None
    w0: Optional[Regime] = None
    control: Optional[dict] = None
    synthesis: Optional[dict] = None
    output: Output = field(default_factory=Output)
    xtol: float = 1e-10
    integrator_step: float = 1e-3


def _num(d, key, where, default=None, required=False):
    if key not in d:
        if required:
            raise ScenarioError(f"{where}.{key}: missing required field")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def parse_scenario(text: str) -> Scenario:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(d, dict):
        raise ScenarioError("top level must be an object")
    pd = d.get("params", {})
    try:
        params = ScallopParams(**{k: _num(pd, k, "params") for k in pd})
    except TypeError as exc:
        raise ScenarioError(f"params: {exc}") from None
    except ValueError as exc:
        raise ScenarioError(f"params: {exc}") from None
    if "rule" not in d:
        raise ScenarioError("rule: missing required field")
    try:
        rule = rule_from_dict(d["rule"])
    except (KeyError, ValueError, TypeError) as exc:
        raise ScenarioError(f"rule: {exc}") from None
    ini = d.get("initial", {})
    w0 = ini.get("w0")
    if w0 is not None and w0 not in (1, 2):
        raise ScenarioError(f"initial.w0: expected 1 or 2, got {w0!r}")
    has_c, has_s = "control" in d, "synthesis" in d
    if has_c == has_s:
        raise ScenarioError("exactly one of 'control' or 'synthesis' must be present")
    syn = d.get("synthesis")
    if has_s:
        if not isinstance(syn, dict):
            raise ScenarioError("synthesis: expected an object")
        if ("target_dx" in syn) == ("target" in syn):
            raise ScenarioError("synthesis: give exactly one of target_dx or target")
        if "target_dx" in syn:
            _num(syn, "target_dx", "synthesis", required=True)
        else:
            _num(syn["target"], "xf", "synthesis.target", required=True)
            _num(syn["target"], "thetaf", "synthesis.target", required=True)
        _num(syn, "T", "synthesis", required=True)
        if syn.get("kind", "smooth") not in ("smooth", "pwc"):
            raise ScenarioError(f"synthesis.kind: expected 'smooth' or 'pwc', got {syn.get('kind')!r}")
        for key in ("theta0", "u0"):
            _num(ini, key, "initial", required=True)
    od = d.get("output", {})
    out = Output(**{k: v for k, v in od.items() if k in Output.__dataclass_fields__})
    tol = d.get("tolerances", {})
    return Scenario(
        params=params,
        rule=rule,
        x0=_num(ini, "x0", "initial", 0.0),
        theta0=_num(ini, "theta0", "initial"),
        u0=_num(ini, "u0", "initial"),
        w0=None if w0 is None else Regime(w0),
        control=d.get("control"),
        synthesis=syn,
        output=out,
        xtol=_num(tol, "xtol", "tolerances", 1e-10),
        integrator_step=_num(tol, "integrator_step", "tolerances", 1e-3),
    )


def load_scenario(path) -> Scenario:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    return parse_scenario(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _events(tr):
    return [e.to_dict() for e in tr.events]


def _simulate_pair(sc: Scenario, sig, s0: State, samples: int, h: float):
    exact = propagate_exact(sc.params, sc.rule, sig, s0, samples=samples, xtol=sc.xtol)
    numeric = propagate_numeric(sc.params, sc.rule, sig, s0, h=h, xtol=sc.xtol)
    return exact, numeric


def _write(out_dir: Path, name: str, text: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)


def cmd_simulate(sc: Scenario, out_dir: Path, samples: int, h: float) -> dict:
    try:
        sig = signal_from_dict(sc.control)
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"control: {exc}") from None
    theta_c, u_c = sig.evaluate(0.0)
    theta0 = float(theta_c) if sc.theta0 is None else sc.theta0
    u0 = float(u_c)
    w0 = initial_regime(sc.rule, u0, sc.w0)
    s0 = State(sc.x0, theta0, w0)
    exact, numeric = _simulate_pair(sc, sig, s0, samples, h)
    summary = {
        "delta_x": exact.delta_x,
        "delta_x_numeric": numeric.delta_x,
        "discrepancy": abs(exact.delta_x - numeric.delta_x),
        "events": _events(exact),
        "final": {"x": float(exact.x[-1]), "theta": float(exact.theta[-1]), "w": int(exact.w[-1])},
        "T": float(sig.T),
        "integrator_step": h,
    }
    _write(out_dir, sc.output.csv, exact.to_csv())
    _write(out_dir, sc.output.summary, _dump(summary))
    return summary


def cmd_synthesize(sc: Scenario, out_dir: Path, samples: int, h: float) -> dict:
    syn = sc.synthesis
    T, kind = float(syn["T"]), syn.get("kind", "smooth")
    w0 = initial_regime(sc.rule, sc.u0, sc.w0)
    if "target_dx" in syn:
        target_x, target_theta = sc.x0 + float(syn["target_dx"]), sc.theta0
        plans = plan_displacement(sc.params, sc.rule, State(sc.x0, sc.theta0, w0), sc.u0, float(syn["target_dx"]), T)
    else:
        target_x, target_theta = float(syn["target"]["xf"]), float(syn["target"]["thetaf"])
        plans = plan_transfer(sc.params, sc.rule, (sc.x0, sc.theta0), (target_x, target_theta), sc.u0, w0, T)
    sig = realize_plan(plans, kind)
    s0 = State(sc.x0, sc.theta0, w0)
    exact, numeric = _simulate_pair(sc, sig, s0, samples, h)
    summary = {
        "target": {"x": target_x, "theta": target_theta},
        "predicted_dx": predicted_total(plans),
        "delta_x": exact.delta_x,
        "delta_x_numeric": numeric.delta_x,
        "plug_back_error": abs(float(exact.x[-1]) - target_x),
        "final": {"x": float(exact.x[-1]), "theta": float(exact.theta[-1]), "w": int(exact.w[-1])},
        "n_strokes": sum(1 for pl in plans if pl.kind == "stroke"),
        "n_events": len(exact.events),
        "events": _events(exact),
        "T": float(sig.T),
    }
    _write(out_dir, sc.output.plan, _dump({"strokes": [pl.to_dict() for pl in plans], "predicted_dx": predicted_total(plans)}))
    _write(out_dir, sc.output.control, _dump(sig.to_dict()))
    _write(out_dir, sc.output.csv, exact.to_csv())
    _write(out_dir, sc.output.summary, _dump(summary))
    return summary


# --------------------------------------------------------------------------
# verification suites


def suite_scallop(p, rng, n=100, h=1e-3):
    """Fixed-regime periodic controls give zero net displacement."""
    worst_exact = worst_num = 0.0
    for _ in range(n):
        sig = random_fourier_control(rng, T=float(rng.uniform(0.5, 2.0)))
        th0 = float(sig.theta(0.0))
        for w in Regime:
            rule = Fixed(w)
            s0 = State(0.0, th0, w)
            worst_exact = max(worst_exact, abs(propagate_exact(p, rule, sig, s0, samples=2).delta_x))
            worst_num = max(worst_num, abs(propagate_numeric(p, rule, sig, s0, h=h).delta_x))
    ok = worst_exact <= 1e-12 and worst_num <= 1e-6
    return ok, {"worst_exact": worst_exact, "worst_numeric": worst_num}


def suite_oracle(p, rng, n=20, h=1e-3):
    """Exact and RK4 propagation agree under a switching rule."""
    from .switching import Thermostat

    worst = 0.0
    rule = Thermostat(0.2)
    for _ in range(n):
        sig = random_fourier_control(rng, T=float(rng.uniform(2.0, 6.0)))
        u0 = float(sig.u(0.0))
        w0 = initial_regime(rule, u0, Regime.VISCOUS if abs(u0) <= rule.eps else None)
        s0 = State(0.0, float(sig.theta(0.0)), w0)
        a = propagate_exact(p, rule, sig, s0, samples=2).delta_x
        b = propagate_numeric(p, rule, sig, s0, h=h).delta_x
        worst = max(worst, abs(a - b))
    return worst <= 1e-6, {"worst_discrepancy": worst}


def suite_monotone(p, rng, n=1000):
    """The regime gap increases strictly along sampled angle pairs."""
    lo, hi = 1e-3, HALF_PI - 1e-3
    a = rng.uniform(lo, hi, n)
    b = rng.uniform(lo, hi, n)
    a, b = np.minimum(a, b), np.maximum(a, b)
    keep = b > a
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegularityWarning)
        diff = np.asarray(gap(p, b[keep])) - np.asarray(gap(p, a[keep]))
    info = {"min_increment": float(diff.min()), "regularity": p.regularity}
    if not p.regular:
        info["diagnostic"] = (
            "regularity condition fails: m(xi-eta) + rho*pi*(xi*a^2 - eta*b^2) = "
            f"{p.regularity:.6g} <= 0, so the gap is not increasing"
        )
    return bool(np.all(diff > 0)), info


def suite_derivative(p, rng, n=100, step=1e-5):
    """Central differences of each primitive reproduce its velocity."""
    th = rng.uniform(0.01, HALF_PI - 0.01, n)
    worst = 0.0
    for w in Regime:
        fd = (np.asarray(f_primitive(p, w, th + step)) - np.asarray(f_primitive(p, w, th - step))) / (2 * step)
        v = np.asarray(velocity(p, w, th))
        worst = max(worst, float(np.max(np.abs(fd - v) / np.abs(v))))
    return worst <= 1e-6, {"worst_relative_error": worst}


SUITES = {
    "scallop": suite_scallop,
    "oracle": suite_oracle,
    "monotone": suite_monotone,
    "derivative": suite_derivative,
}


def cmd_verify(p: ScallopParams, seed: int, h: float) -> tuple:
    report = {}
    all_ok = True
    for name, suite in SUITES.items():
        rng = np.random.default_rng([seed, len(name)])
        kwargs = {"h": h} if name in ("scallop", "oracle") else {}
        ok, info = suite(p, rng, **kwargs)
        report[name] = {"pass": ok, **info}
        all_ok &= ok
    return all_ok, report


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out-dir", default=".", help="directory for output files (default: cwd)")
    common.add_argument("--samples", type=int, default=None, help="trajectory samples (default: scenario or 701)")
    common.add_argument("--integrator-step", type=float, default=None, help="RK4 step for the numeric check")

    ap = argparse.ArgumentParser(prog="scallop-switch", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="simulate an inline control")
    s.add_argument("scenario")
    s = sub.add_parser("synthesize", parents=[common], help="plan a control and verify it by simulation")
    s.add_argument("scenario")
    s = sub.add_parser("verify", parents=[common], help="run the built-in property suites")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--scenario", default=None, help="take swimmer parameters from this scenario")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = Path(args.out_dir)
    try:
        if args.command == "verify":
            p = load_scenario(args.scenario).params if args.scenario else ScallopParams()
            ok, report = cmd_verify(p, args.seed, args.integrator_step or 1e-3)
            for name, info in report.items():
                extra = ", ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                                  for k, v in info.items() if k != "pass")
                print(f"{'PASS' if info['pass'] else 'FAIL'} {name}: {extra}")
            return EXIT_OK if ok else EXIT_FAIL
        sc = load_scenario(args.scenario)
        samples = args.samples or sc.output.samples
        h = args.integrator_step or sc.integrator_step
        if args.command == "simulate":
            if sc.control is None:
                raise ScenarioError("simulate needs an inline 'control'")
            summary = cmd_simulate(sc, out_dir, samples, h)
        else:
            if sc.synthesis is None:
                raise ScenarioError("synthesize needs a 'synthesis' request")
            summary = cmd_synthesize(sc, out_dir, samples, h)
        sys.stdout.write(_dump(summary))
        return EXIT_OK
    except ScenarioError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except InfeasibleError as exc:
        msg = f"infeasible: {exc}"
        if exc.interval is not None:
            msg += f" (achievable interval {list(exc.interval)})"
        print(msg, file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ValidationError, RegularityError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (CoherenceError, MissingHintError) as exc:
        print(f"parse error: inconsistent initial state: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    raise SystemExit(main())
