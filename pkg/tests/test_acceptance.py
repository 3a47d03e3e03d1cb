"""Acceptance criteria, one test each, at their stated tolerances.

Every test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion still reports its measured value.
"""

import math
import time

import numpy as np

from scallop_switch import InfeasibleError, State
from scallop_switch.control import random_fourier_control
from scallop_switch.model import HALF_PI, Regime, f_primitive, gap, velocity
from scallop_switch.simulate import (
    StrokeCase,
    convergence_scenarios,
    observed_order,
    propagate_exact,
    propagate_numeric,
)
from scallop_switch.switching import Fixed, Sign, Thermostat, initial_regime
from scallop_switch.synthesize import (
    plan_displacement,
    plan_stroke,
    plan_transfer,
    reachable_radius,
    realize_plan,
)

Q = math.pi / 4
V, I = Regime.VISCOUS, Regime.IDEAL
EPS = 0.1


def _simulate(p, rule, plans, kind="smooth"):
    sig = realize_plan(plans, kind)
    s0 = State(0.0, plans[0].theta0, plans[0].w0)
    return sig, s0, propagate_exact(p, rule, sig, s0)


def test_worked_example_reproduction(p, report):
    t0 = time.perf_counter()
    rule = Thermostat(EPS)
    s0 = State(0.0, Q, I)
    plans = plan_displacement(p, rule, s0, 5 * EPS, 1.0, 7.0)
    sig = realize_plan(plans, "smooth")
    exact = propagate_exact(p, rule, sig, s0)
    numeric = propagate_numeric(p, rule, sig, s0, h=1e-3)
    elapsed = time.perf_counter() - t0
    times = [e.t for e in exact.events]
    e_ex, e_nu = abs(exact.delta_x - 1.0), abs(numeric.delta_x - 1.0)
    ok = (
        len(plans) == 1
        and plans[0].switch_times == (2.0, 6.0)
        and np.allclose(times, [2.0, 6.0], atol=1e-9)
        and e_ex <= 1e-9
        and e_nu <= 1e-4
        and elapsed < 1.0
    )
    report(1, ok, f"|dx_exact-1|={e_ex:.2e} |dx_rk4-1|={e_nu:.2e} events={times} runtime={elapsed:.3f}s")
    assert ok


def test_scallop_theorem_suite(p, report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240101)
    worst_ex = worst_nu = 0.0
    for _ in range(100):
        sig = random_fourier_control(rng, T=float(rng.uniform(0.5, 2.0)), n_harmonics=int(rng.integers(1, 5)))
        for w in Regime:
            s0 = State(0.0, float(sig.theta(0.0)), w)
            worst_ex = max(worst_ex, abs(propagate_exact(p, Fixed(w), sig, s0, samples=2).delta_x))
            worst_nu = max(worst_nu, abs(propagate_numeric(p, Fixed(w), sig, s0, h=1e-3).delta_x))
    elapsed = time.perf_counter() - t0
    ok = worst_ex <= 1e-12 and worst_nu <= 1e-6 and elapsed < 10.0
    report(2, ok, f"max|dx| exact={worst_ex:.2e} rk4={worst_nu:.2e} runtime={elapsed:.2f}s")
    assert ok


def test_piecewise_constant_equivalence(p, report):
    rng = np.random.default_rng(77)
    rule = Thermostat(EPS)
    starts = [(0.05, V), (0.05, I), (0.5, None), (-0.5, None)]
    worst = 0.0
    for k in range(20):
        u0, hint = starts[k % 4]
        theta0 = float(rng.uniform(0.3, 1.3))
        w0 = initial_regime(rule, u0, hint)
        case = StrokeCase.VISCOUS_HOLD if hint is V else StrokeCase.IDEAL_HOLD if hint is I else (
            StrokeCase.IDEAL_TWO if u0 > 0 else StrokeCase.VISCOUS_TWO)
        r = reachable_radius(p, rule, case, theta0)
        lo, hi = r.interval
        target = float(rng.uniform(0.9 * lo, 0.9 * hi))
        plan = plan_stroke(p, rule, theta0, u0, target, 7.0, w0=w0)
        dx = {}
        for kind in ("smooth", "pwc"):
            _, _, tr = _simulate(p, rule, [plan], kind)
            dx[kind] = tr.delta_x
        worst = max(worst, abs(dx["smooth"] - dx["pwc"]))
    ok = worst <= 1e-10
    report(3, ok, f"max|dx_smooth-dx_pwc|={worst:.2e} over 20 skeletons")
    assert ok


def test_sign_rule_forward_only(p, report):
    rng = np.random.default_rng(4242)
    rule = Sign()
    worst = math.inf
    for _ in range(200):
        sig = random_fourier_control(rng, T=float(rng.uniform(0.5, 3.0)), n_harmonics=int(rng.integers(1, 5)))
        u0 = float(sig.u(0.0))
        w0 = initial_regime(rule, u0, I if u0 == 0 else None)
        tr = propagate_exact(p, rule, sig, State(0.0, float(sig.theta(0.0)), w0), samples=2)
        worst = min(worst, tr.delta_x)
    rejected = 0
    for target in (-1e-6, -0.5, -3.0):
        for u0 in (0.5, -0.5):
            try:
                plan_displacement(p, rule, State(0.0, Q, initial_regime(rule, u0)), u0, target, 7.0)
            except InfeasibleError:
                rejected += 1
    ok = worst >= -1e-12 and rejected == 6
    report(4, ok, f"min dx over 200 controls={worst:.3e}, negative targets rejected {rejected}/6")
    assert ok


def test_thermostat_bidirectionality(p, report):
    rule = Thermostat(EPS)
    worst = 0.0
    done = 0
    for u0, hint in ((0.05, V), (0.05, I), (0.5, None), (-0.5, None)):
        w0 = initial_regime(rule, u0, hint)
        for target in (0.5, -0.5):
            plans = plan_displacement(p, rule, State(0.0, Q, w0), u0, target, 7.0)
            _, _, tr = _simulate(p, rule, plans)
            worst = max(worst, abs(tr.delta_x - target))
            done += 1
    ok = worst <= 1e-9 and done == 8
    report(5, ok, f"8/8 syntheses, max plug-back error={worst:.2e}")
    assert ok


def test_monotonicity_and_derivatives(p, report):
    rng = np.random.default_rng(6)
    a = rng.uniform(1e-3, HALF_PI - 1e-3, 1000)
    b = rng.uniform(1e-3, HALF_PI - 1e-3, 1000)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    inc = np.asarray(gap(p, hi)) - np.asarray(gap(p, lo))
    mono = bool(np.all(inc > 0))
    th = rng.uniform(0.01, HALF_PI - 0.01, 100)
    h = 1e-5
    worst = 0.0
    for w in Regime:
        fd = (np.asarray(f_primitive(p, w, th + h)) - np.asarray(f_primitive(p, w, th - h))) / (2 * h)
        worst = max(worst, float(np.max(np.abs(fd / np.asarray(velocity(p, w, th)) - 1))))
    ok = mono and worst <= 1e-6
    report(6, ok, f"gap increasing on 1000 pairs: {mono}; max FD relative error={worst:.2e}")
    assert ok


def test_oracle_convergence(report):
    steps = (4e-3, 2e-3, 1e-3)
    orders = {name: observed_order(steps, errs) for name, errs in convergence_scenarios(2024, 10, steps)}
    worst = min(orders.values())
    ok = len(orders) == 10 and worst >= 3.5
    report(7, ok, f"observed order min={worst:.3f} over {len(orders)} scenarios")
    assert ok


def test_global_transfer(p, report):
    rule = Thermostat(EPS)
    lines, ok = [], True
    for goal in ((2.0, 1.2), (-1.5, 0.6)):
        plans = plan_transfer(p, rule, (0.0, Q), goal, 5 * EPS, I)
        _, _, tr = _simulate(p, rule, plans)
        err = abs(tr.x[-1] - goal[0])
        exact_angle = tr.theta[-1] == goal[1]
        ok &= err <= 1e-9 and exact_angle
        lines.append(f"{goal}: |x-xf|={err:.2e} theta exact={exact_angle}")
    report(8, ok, "; ".join(lines))
    assert ok


def test_multi_stroke_splitting(p, report):
    rule = Thermostat(EPS)
    s0 = State(0.0, Q, I)
    r = reachable_radius(p, rule, StrokeCase.IDEAL_TWO, Q).r
    target = 5 * r
    plans = plan_displacement(p, rule, s0, 5 * EPS, target, 7.0)
    sig, _, tr = _simulate(p, rule, plans)
    bounds = np.cumsum([0.0] + [pl.T for pl in plans])
    xb = np.interp(bounds, tr.t, tr.x)
    per_stroke = np.diff(xb)
    err = abs(tr.delta_x - target)
    ok = len(plans) >= 6 and err <= 1e-9 and bool(np.all(np.abs(per_stroke) < r))
    report(9, ok, f"N={len(plans)} |total-5r|={err:.2e} max|stroke dx|/r={np.max(np.abs(per_stroke)) / r:.3f}")
    assert ok
