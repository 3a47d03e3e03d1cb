"""Constructive control synthesis.

The displacement of a stroke depends only on its switching skeleton: the
initial regime, the angles at which the regime flips, and the start/end
angle. Synthesis first inverts a monotone scalar displacement map by
bisection to get those angles, then attaches switch times and threshold
rates. Realization turns the skeleton into a control, directly from the
skeleton nodes when that interpolant switches exactly as planned, and
otherwise from a shaped piecewise-linear rate profile.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .control import (
    NodeConstraints,
    build_piecewise_constant,
    build_smooth_control,
    validate_against_rule,
)
from .errors import DomainError, InfeasibleError, ValidationError
from .model import HALF_PI, Regime, ScallopParams, State, check_angle, gap
from .simulate import StrokeCase, skeleton_displacement
from .switching import Fixed, Magnitude, Sign, SwitchingRule, Thermostat, initial_regime

log = logging.getLogger(__name__)

FILL = 0.9
# switch-time fractions of the stroke period, by number of switches
DEFAULT_FRACTIONS = {0: (), 1: (0.5,), 2: (2 / 7, 6 / 7), 4: (0.2, 0.4, 0.6, 0.8)}
LEG_FRACTIONS = {0: (), 2: (1 / 3, 2 / 3)}
# reserve half-extent (fraction of the available room) for the four-switch construction
FOUR_RESERVE = 0.05

# shaped rate profile: ramps last at most RAMP_FRAC of a segment and reverse
# the angle by at most RAMP_ANGLE
RAMP_FRAC = 0.1
RAMP_ANGLE = 2e-3
CRUISE_MARGIN = 0.1
#: Synthesized switch angles stay this far from the edges of (0, pi/2), leaving
#: room for ramp overshoot inside the simulation domain.
SYNTH_MARGIN = 1e-2


def _bounds(margin=SYNTH_MARGIN):
    return margin, HALF_PI - margin


# --------------------------------------------------------------------------
# scalar inversion


def _bisect_increasing(f, lo, hi, target, n_check=33):
    """Solve ``f(x) = target`` for increasing ``f`` on ``[lo, hi]``."""
    xs = np.linspace(lo, hi, n_check)
    vals = np.array([f(x) for x in xs])
    if np.any(np.diff(vals) <= 0):
        raise InfeasibleError("displacement map is not increasing on its bracket")
    if not vals[0] <= target <= vals[-1]:
        raise InfeasibleError(
            f"target {target:.12g} outside achievable interval [{vals[0]:.12g}, {vals[-1]:.12g}]",
            interval=(float(vals[0]), float(vals[-1])),
        )
    i = int(np.searchsorted(vals, target))
    a, b = xs[max(i - 1, 0)], xs[min(i, n_check - 1)]
    if vals[min(i, n_check - 1)] == target:
        return float(b)
    while True:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if f(mid) < target:
            a = mid
        else:
            b = mid
    return float(a if abs(f(a) - target) <= abs(f(b) - target) else b)


def solve_single_angle(p: ScallopParams, theta0: float, target: float, w0: Regime = Regime.VISCOUS,
                       margin: float = SYNTH_MARGIN) -> float:
    """Switch angle of a one-switch stroke starting in the hysteresis band.

    With ``w0`` viscous the displacement is ``gap(theta0) - gap(theta1)``,
    decreasing in ``theta1``; with ``w0`` ideal it is the negative.
    """
    p.require_regular()
    check_angle(theta0, margin)
    lo, hi = _bounds(margin)
    g0 = gap(p, theta0)
    sgn = -1.0 if Regime(w0) is Regime.VISCOUS else 1.0
    try:
        return _bisect_increasing(lambda th: gap(p, th) - g0, lo, hi, sgn * target)
    except InfeasibleError as exc:
        if exc.interval is None:
            raise
        a, b = sorted(sgn * v for v in exc.interval)
        raise InfeasibleError(
            f"target {target:.12g} outside achievable one-switch interval [{a:.12g}, {b:.12g}]", interval=(a, b)
        ) from None


def _pair_map(p, theta0, margin, symmetric):
    lo, hi = _bounds(margin)
    if symmetric:
        dmax = min(theta0 - lo, hi - theta0)

        def angles(s):
            return theta0 + s * dmax, theta0 - s * dmax
    else:
        up, down = hi - theta0, theta0 - lo

        def angles(s):
            if s >= 0:
                return theta0 + s * up, theta0 - s * down
            return theta0 + s * down, theta0 - s * up

    def f(s):
        a, b = angles(s)
        return gap(p, a) - gap(p, b)

    return f, angles


def solve_symmetric_pair(p: ScallopParams, theta0: float, target: float, margin: float = SYNTH_MARGIN):
    """Angles ``theta0 +- delta`` with ``gap(theta1) - gap(theta2) = target``."""
    p.require_regular()
    check_angle(theta0, margin)
    f, angles = _pair_map(p, theta0, margin, symmetric=True)
    s = _bisect_increasing(f, -1.0, 1.0, target)
    return angles(s)


def solve_stretched_pair(p: ScallopParams, theta0: float, target: float, margin: float = SYNTH_MARGIN):
    """Like :func:`solve_symmetric_pair`, but each angle moves proportionally to
    its room to the domain edge, so the full gap range is reachable from any ``theta0``."""
    p.require_regular()
    check_angle(theta0, margin)
    f, angles = _pair_map(p, theta0, margin, symmetric=False)
    s = _bisect_increasing(f, -1.0, 1.0, target)
    return angles(s)


def _solve_pair(p, theta0, target, margin):
    try:
        return solve_symmetric_pair(p, theta0, target, margin)
    except InfeasibleError:
        return solve_stretched_pair(p, theta0, target, margin)


# four-switch orderings that leave the displacement unchanged (1-based positions)
FOUR_PERMUTATIONS = ((1, 2, 3, 4), (1, 4, 3, 2), (3, 4, 1, 2), (3, 2, 1, 4))


def _four_ok(angles, case, side, theta0):
    t1, t2, t3, t4 = angles
    if case is StrokeCase.VISCOUS_FOUR:
        return [("theta2 > theta1", t2 > t1), ("theta3 > theta4", t3 > t4)]
    if side > 0:
        checks = [("theta1 > theta4", t1 > t4), ("theta2 > theta3", t2 > t3)]
        if theta0 is not None:
            checks += [("theta1 > theta0", t1 > theta0), ("theta0 > theta4", theta0 > t4)]
    else:
        checks = [("theta1 < theta4", t1 < t4), ("theta2 < theta3", t2 < t3)]
        if theta0 is not None:
            checks += [("theta1 < theta0", t1 < theta0), ("theta0 < theta4", theta0 < t4)]
    return checks


def admissible_ordering(angles, case: StrokeCase = StrokeCase.IDEAL_FOUR, side: int = 1, theta0=None):
    """First displacement-preserving permutation realizable under the magnitude rule.

    ``side`` is the sign of ``u0`` for the ideal start. Raises
    :class:`InfeasibleError` naming the failed ordering constraints.
    """
    failures = []
    for perm in FOUR_PERMUTATIONS:
        cand = tuple(float(angles[i - 1]) for i in perm)
        checks = _four_ok(cand, case, side, theta0)
        bad = [name for name, ok in checks if not ok]
        if not bad:
            return cand
        failures.append(f"{perm}: {', '.join(bad)}")
    raise InfeasibleError("no admissible ordering; " + "; ".join(failures))


def solve_four_angles(p: ScallopParams, theta0: float, target: float, case: StrokeCase = StrokeCase.IDEAL_FOUR,
                      side: int = 1, margin: float = SYNTH_MARGIN):
    """Four switch angles for the magnitude rule.

    The stroke sweeps an opening interval fast and a closing interval fast;
    the displacement is ``span(open) - span(close)`` where
    ``span(s) = gap(top) - gap(bottom)`` of an interval around ``theta0``
    stretched by ``s`` toward both domain edges. One extent stays at a small
    reserve while the other is solved for.
    """
    p.require_regular()
    check_angle(theta0, margin)
    lo, hi = _bounds(margin)

    def interval(s):
        return theta0 - s * (theta0 - lo), theta0 + s * (hi - theta0)

    def span(s):
        a, b = interval(s)
        return gap(p, b) - gap(p, a)

    base = span(FOUR_RESERVE)
    if target >= 0:
        o = _bisect_increasing(span, FOUR_RESERVE, 1.0, target + base)
        c = FOUR_RESERVE
    else:
        c = _bisect_increasing(span, FOUR_RESERVE, 1.0, base - target)
        o = FOUR_RESERVE
    (olo, ohi), (clo, chi) = interval(o), interval(c)
    if case is StrokeCase.VISCOUS_FOUR:
        angles = (olo, ohi, chi, clo)
    elif side > 0:
        angles = (ohi, chi, clo, olo)
    else:
        angles = (clo, olo, ohi, chi)
    return admissible_ordering(angles, case, side, theta0)


# --------------------------------------------------------------------------
# reachable radius


@dataclass(frozen=True)
class ReachableRadius:
    r: float
    interval: tuple  # achievable (min, max) per-stroke displacement


def classify_case(rule: SwitchingRule, u0: float, w0: Optional[Regime] = None) -> StrokeCase:
    if isinstance(rule, Fixed):
        raise InfeasibleError("a fixed regime cannot produce net displacement (scallop theorem)")
    w = initial_regime(rule, u0, w0)
    if isinstance(rule, Thermostat):
        if abs(u0) <= rule.eps:
            return StrokeCase.VISCOUS_HOLD if w is Regime.VISCOUS else StrokeCase.IDEAL_HOLD
        return StrokeCase.IDEAL_TWO if w is Regime.IDEAL else StrokeCase.VISCOUS_TWO
    if isinstance(rule, Sign):
        return StrokeCase.IDEAL_TWO if w is Regime.IDEAL else StrokeCase.VISCOUS_TWO
    return StrokeCase.IDEAL_FOUR if w is Regime.IDEAL else StrokeCase.VISCOUS_FOUR


def reachable_radius(p: ScallopParams, rule: SwitchingRule, case: StrokeCase, theta0: float,
                     margin: float = SYNTH_MARGIN) -> ReachableRadius:
    """Largest ``r`` such that every ``|target| < r`` is reachable in one stroke."""
    p.require_regular()
    check_angle(theta0, margin)
    lo, hi = _bounds(margin)
    full = gap(p, hi) - gap(p, lo)
    if case.n_angles == 1:
        g0 = gap(p, theta0)
        if case is StrokeCase.VISCOUS_HOLD:
            iv = (g0 - gap(p, hi), g0 - gap(p, lo))
        else:
            iv = (gap(p, lo) - g0, gap(p, hi) - g0)
        return ReachableRadius(min(-iv[0], iv[1]), iv)
    if case.n_angles == 2:
        if isinstance(rule, Sign):
            return ReachableRadius(full, (0.0, full))
        return ReachableRadius(full, (-full, full))
    s_res = gap(p, theta0 + FOUR_RESERVE * (hi - theta0)) - gap(p, theta0 - FOUR_RESERVE * (theta0 - lo))
    r = full - s_res
    return ReachableRadius(r, (-r, r))


# --------------------------------------------------------------------------
# stroke plans


@dataclass(frozen=True)
class StrokePlan:
    """Switching skeleton of one stroke (periodic) or one angle-adjustment leg."""

    rule: SwitchingRule
    w0: Regime
    u0: float
    theta0: float
    switch_angles: tuple
    switch_times: tuple
    switch_rates: tuple
    T: float
    predicted_dx: float
    theta_end: Optional[float] = None
    kind: str = "stroke"

    @property
    def end_angle(self) -> float:
        return self.theta0 if self.theta_end is None else self.theta_end

    @property
    def regimes(self) -> list:
        ws = [Regime(self.w0)]
        for _ in self.switch_angles:
            ws.append(ws[-1].other)
        return ws

    @property
    def w_end(self) -> Regime:
        return self.regimes[-1]

    def skeleton_nodes(self):
        return (
            [(0.0, self.theta0, self.u0)]
            + list(zip(self.switch_times, self.switch_angles, self.switch_rates))
            + [(self.T, self.end_angle, self.u0)]
        )

    def to_dict(self):
        return {
            "kind": self.kind,
            "rule": self.rule.to_dict(),
            "w0": int(self.w0),
            "u0": self.u0,
            "theta0": self.theta0,
            "theta_end": self.end_angle,
            "switch_angles": list(self.switch_angles),
            "switch_times": list(self.switch_times),
            "switch_rates": list(self.switch_rates),
            "T": self.T,
            "predicted_dx": self.predicted_dx,
        }


def _side(u):
    return 1 if u >= 0 else -1


def _hold_interval(rule, w, side, u_ref):
    """Open interval of cruise rates that keep regime ``w``, shrunk by a safety margin."""
    inf = math.inf
    if isinstance(rule, Thermostat):
        m = CRUISE_MARGIN * rule.eps
        return (-rule.eps + m, inf) if w is Regime.IDEAL else (-inf, rule.eps - m)
    if isinstance(rule, Magnitude):
        m = CRUISE_MARGIN * rule.M
        if w is Regime.VISCOUS:
            return (-rule.M + m, rule.M - m)
        return (rule.M + m, inf) if side > 0 else (-inf, -rule.M - m)
    if isinstance(rule, Sign):
        m = CRUISE_MARGIN * (abs(u_ref) if u_ref else 1.0)
        return (m, inf) if w is Regime.IDEAL else (-inf, -m)
    return (-inf, inf)


def _kick(rule, w):
    # thermostat regimes hold inside the band, so entering one needs an explicit overshoot
    if isinstance(rule, Thermostat):
        return 2 * rule.eps if w is Regime.IDEAL else -2 * rule.eps
    return None


def _segments(rule, w0, u0, theta0, angles, rates, theta_end):
    pts = [theta0, *angles, theta_end]
    us = [u0, *rates, u0]
    segs = []
    w = Regime(w0)
    side = _side(u0)
    for i in range(len(pts) - 1):
        if i > 0:
            side = _side(us[i])
        lo, hi = _hold_interval(rule, w, side, u0)
        rest_ok = int(rule.forced(0.0)) in (0, int(w))
        segs.append(
            dict(w=w, th_a=pts[i], th_b=pts[i + 1], u_a=us[i], u_b=us[i + 1],
                 kick=_kick(rule, w) if i > 0 else None, lo=lo, hi=hi, rest_ok=rest_ok)
        )
        w = w.other
    return segs


def _ramps(seg, L):
    """Durations of the kick, ramp-in and ramp-out parts.

    Ramps that reverse the motion are kept short in absolute time so the
    angle overshoots the segment ends by at most ``RAMP_ANGLE``.
    """
    kap = seg["kick"] if seg["kick"] is not None else seg["u_a"]
    scale = max(abs(seg["u_a"]), abs(kap), abs(seg["u_b"]), 1e-12)
    tau = min(RAMP_FRAC * L, RAMP_ANGLE / scale)
    tk = tau if seg["kick"] is not None else 0.0
    return tk, tau, tau, kap


def _linear_part(seg, L):
    """Angle covered is ``A + B * cruise`` for segment duration ``L``."""
    tk, t1, t2, kap = _ramps(seg, L)
    A = tk * (seg["u_a"] + kap) / 2 + t1 * kap / 2 + t2 * seg["u_b"] / 2
    B = L - tk - t1 / 2 - t2 / 2
    return A, B, tk + t1 / 2 + t2 / 2


def _cruise_target(seg, need):
    # admissible cruise rate moving the angle by ``need`` (sign matters), away from the bounds
    lo, hi = seg["lo"], seg["hi"]
    if need > 0:
        lower, upper = max(lo, 0.0), hi
    else:
        lower, upper = max(-hi, 0.0), -lo
    if upper <= lower:
        raise InfeasibleError(
            f"{seg['w'].name} segment cannot move the angle from {seg['th_a']:.6g} to {seg['th_b']:.6g} "
            "while respecting the switching rule"
        )
    if math.isinf(upper):
        mag = 1.5 * lower if lower > 0 else 1.0
    else:
        mag = lower + 0.5 * (upper - lower)
    return math.copysign(mag, need)


def _choose_duration(seg, L0):
    """Segment duration: ``L0`` when its cruise rate is admissible, else stretched or shrunk."""
    D = seg["th_b"] - seg["th_a"]
    if D == 0 and seg["u_a"] == seg["u_b"] == 0.0 and seg["rest_ok"]:
        return L0
    L = L0
    for _ in range(50):
        A, B, fixed = _linear_part(seg, L)
        if B > 0 and seg["lo"] < (D - A) / B < seg["hi"]:
            return L
        need = D - A
        if need == 0:
            raise InfeasibleError(f"{seg['w'].name} segment cannot dwell at a fixed angle under this rule")
        c = _cruise_target(seg, need)
        L_new = fixed + need / c
        if L_new == L:
            break
        L = L_new
    raise InfeasibleError(f"no admissible duration for the {seg['w'].name} segment")


def _segment_profile(seg, L):
    """Rate breakpoints ``(offset, u)`` of the shaped profile on one segment."""
    D = seg["th_b"] - seg["th_a"]
    if D == 0 and seg["u_a"] == seg["u_b"] == 0.0 and seg["rest_ok"]:
        return [(0.0, 0.0), (L, 0.0)]
    tk, t1, t2, kap = _ramps(seg, L)
    A, B, _ = _linear_part(seg, L)
    c = (D - A) / B
    if not seg["lo"] < c < seg["hi"]:
        raise InfeasibleError(f"cruise rate {c:.6g} outside ({seg['lo']:.6g}, {seg['hi']:.6g})")
    pts = [(0.0, seg["u_a"])]
    if tk > 0:
        pts.append((tk, kap))
    pts += [(tk + t1, c), (L - t2, c), (L, seg["u_b"])]
    return pts


def _make_plan(p, rule, w0, u0, theta0, angles, rates, T, theta_end=None, kind="stroke", fractions=None):
    n = len(angles)
    theta_end_v = theta0 if theta_end is None else theta_end
    if fractions is None:
        fractions = (DEFAULT_FRACTIONS if kind == "stroke" else LEG_FRACTIONS).get(n) or tuple(
            (i + 1) / (n + 1) for i in range(n)
        )
    marks = [0.0, *[f * T for f in fractions], T]
    segs = _segments(rule, w0, u0, theta0, angles, rates, theta_end_v)
    L = [_choose_duration(s, b - a) for s, a, b in zip(segs, marks[:-1], marks[1:])]
    times = np.cumsum([0.0] + L)
    T_new = float(times[-1])
    if abs(T_new - T) > 1e-12 * max(1.0, T):
        log.info("stroke period stretched from %.6g to %.6g to respect the switching rule", T, T_new)
        T_out = T_new
        sw_times = tuple(float(t) for t in times[1:-1])
    else:
        T_out = T
        sw_times = tuple(float(m) for m in marks[1:-1])
    dx = skeleton_displacement(p, w0, theta0, angles, theta_end)
    return StrokePlan(rule, Regime(w0), float(u0), float(theta0), tuple(float(a) for a in angles), sw_times,
                      tuple(float(r) for r in rates), T_out, float(dx), theta_end, kind)


def _switch_rates(rule, case, u0):
    if isinstance(rule, Thermostat):
        e = rule.eps
        return {
            StrokeCase.VISCOUS_HOLD: (e,),
            StrokeCase.IDEAL_HOLD: (-e,),
            StrokeCase.IDEAL_TWO: (-e, e),
            StrokeCase.VISCOUS_TWO: (e, -e),
        }[case]
    if isinstance(rule, Sign):
        return (0.0, 0.0)
    M = rule.M
    if case is StrokeCase.VISCOUS_FOUR:
        return (M, M, -M, -M)
    s = _side(u0)
    return (s * M, -s * M, -s * M, s * M)


def _stroke_angles(p, rule, case, theta0, target, u0, margin):
    if isinstance(rule, Sign) and target <= 0:
        raise InfeasibleError(
            "the sign rule only moves forward: any periodic stroke has displacement >= 0, "
            f"and a nonzero stroke has displacement > 0 (requested {target:.6g})",
            interval=(0.0, math.inf),
        )
    if case.n_angles == 1:
        return (solve_single_angle(p, theta0, target, case.w0, margin),)
    if case.n_angles == 2:
        if case is StrokeCase.IDEAL_TWO:
            return _solve_pair(p, theta0, target, margin)
        a, b = _solve_pair(p, theta0, target, margin)
        return (b, a)
    return solve_four_angles(p, theta0, target, case, _side(u0), margin)


def plan_stroke(p: ScallopParams, rule: SwitchingRule, theta0: float, u0: float, target: float, T: float,
                w0: Optional[Regime] = None, fractions=None, margin: float = SYNTH_MARGIN) -> StrokePlan:
    """One periodic stroke of period ``T`` (stretched if needed) moving by ``target``."""
    if not T > 0:
        raise ValueError("period must be positive")
    case = classify_case(rule, u0, w0)
    w = case.w0
    if target == 0:
        try:
            return _make_plan(p, rule, w, u0, theta0, (), (), T)
        except InfeasibleError:
            pass
    angles = _stroke_angles(p, rule, case, theta0, target, u0, margin)
    return _make_plan(p, rule, w, u0, theta0, angles, _switch_rates(rule, case, u0), T, fractions=fractions)


def plan_displacement(p: ScallopParams, rule: SwitchingRule, s0: State, u0: float, target: float, T: float,
                      fill: float = FILL, margin: float = SYNTH_MARGIN) -> list:
    """Strokes moving the swimmer by ``target`` at fixed end angle ``s0.theta``.

    Targets beyond the one-stroke radius are split into ``N`` equal strokes of
    period ``T/N`` each; the regime reached after each stroke seeds the next.
    """
    if not math.isfinite(target):
        raise ValueError("target must be finite")
    if isinstance(rule, Sign) and target < 0:
        raise InfeasibleError("the sign rule only moves forward; negative targets are unreachable",
                              interval=(0.0, math.inf))
    case = classify_case(rule, u0, s0.w)
    rad = reachable_radius(p, rule, case, s0.theta, margin)
    n = 1 if abs(target) < rad.r else int(math.ceil(abs(target) / (fill * rad.r)))
    plans = []
    w = s0.w
    for _ in range(n):
        plan = plan_stroke(p, rule, s0.theta, u0, target / n, T / n, w0=w, margin=margin)
        plans.append(plan)
        w = plan.w_end
    return plans


def _leg_direction_ok(rule, w, u0, D, L):
    seg = dict(w=w, th_a=0.0, th_b=D, u_a=u0, u_b=u0, kick=None, rest_ok=False)
    seg["lo"], seg["hi"] = _hold_interval(rule, w, _side(u0), u0)
    try:
        _choose_duration(seg, L)
        return True
    except InfeasibleError:
        return False


def plan_leg(p: ScallopParams, rule: SwitchingRule, theta0: float, theta_f: float, w: Regime, u0: float,
             T: float, margin: float = SYNTH_MARGIN) -> Optional[StrokePlan]:
    """Angle-adjustment leg from ``theta0`` to ``theta_f`` starting and ending with rate ``u0``.

    The leg keeps the current regime when its admissible rates can move the
    angle in the required direction; otherwise it briefly leaves the regime
    and re-enters it near ``theta_f``. Its drift is the primitive difference
    along that path.
    """
    check_angle([theta0, theta_f], margin)
    if theta_f == theta0:
        return None
    D = theta_f - theta0
    w = Regime(w)
    if _leg_direction_ok(rule, w, u0, D, T):
        return _make_plan(p, rule, w, u0, theta0, (), (), T, theta_end=theta_f, kind="leg")
    if isinstance(rule, Thermostat):
        raise InfeasibleError("thermostat leg unexpectedly infeasible")
    lo, hi = _bounds(margin)
    step = min(0.02, 0.25 * abs(D))
    if D < 0:
        a, b = min(theta0 + step, hi), max(theta_f - step, lo)
    else:
        a, b = max(theta0 - step, lo), min(theta_f + step, hi)
    if isinstance(rule, Sign):
        rates = (0.0, 0.0)
    else:
        rates = (math.copysign(rule.M, u0), math.copysign(rule.M, u0))
    return _make_plan(p, rule, w, u0, theta0, (a, b), rates, T, theta_end=theta_f, kind="leg")


def plan_transfer(p: ScallopParams, rule: SwitchingRule, start: tuple, goal: tuple, u0: float,
                  w0: Optional[Regime] = None, T: float = 7.0, margin: float = SYNTH_MARGIN) -> list:
    """Plan ``(x0, theta0) -> (xf, theta_f)``: strokes, one angle leg, strokes.

    Phase one moves to ``xf`` at angle ``theta0``; the leg then drifts to some
    point ``C`` while reaching ``theta_f``; phase three moves back from ``C``
    to ``xf`` at angle ``theta_f``.
    """
    if isinstance(rule, Fixed):
        raise InfeasibleError("a fixed regime cannot be steered")
    x0, theta0 = start
    xf, theta_f = goal
    check_angle([theta0, theta_f], margin)
    w_start = initial_regime(rule, u0, w0)
    phase1 = plan_displacement(p, rule, State(x0, theta0, w_start), u0, xf - x0, T, margin=margin)
    w = phase1[-1].w_end
    leg = plan_leg(p, rule, theta0, theta_f, w, u0, T, margin)
    if leg is None:
        return phase1
    x_c = xf + leg.predicted_dx
    phase3 = plan_displacement(p, rule, State(x_c, theta_f, leg.w_end), u0, xf - x_c, T, margin=margin)
    return phase1 + [leg] + phase3


# --------------------------------------------------------------------------
# realization


def _shaped_nodes(plan: StrokePlan):
    segs = _segments(plan.rule, plan.w0, plan.u0, plan.theta0, plan.switch_angles, plan.switch_rates,
                     plan.end_angle)
    marks = [0.0, *plan.switch_times, plan.T]
    nodes = [(0.0, plan.theta0, plan.u0)]
    for seg, ta, tb in zip(segs, marks[:-1], marks[1:]):
        prof = _segment_profile(seg, tb - ta)
        th = seg["th_a"]
        for (o0, u_0), (o1, u_1) in zip(prof[:-1], prof[1:]):
            th = th + 0.5 * (u_0 + u_1) * (o1 - o0)
            nodes.append((ta + o1, th, u_1))
        nodes[-1] = (tb, seg["th_b"], seg["u_b"])
    return nodes


def _build(nodes, kind, periodic):
    c = NodeConstraints.from_nodes(nodes, periodic=periodic)
    return build_smooth_control(c, check=False) if kind == "smooth" else build_piecewise_constant(c, check=False)


def stroke_nodes(plan: StrokePlan, kind: str = "smooth"):
    """Node list realizing ``plan``: the bare skeleton when it validates, else the shaped profile."""
    periodic = plan.theta_end is None or plan.theta_end == plan.theta0
    n = len(plan.switch_angles)
    for nodes in (plan.skeleton_nodes(), None):
        if nodes is None:
            nodes = _shaped_nodes(plan)
        try:
            sig = _build(nodes, kind, periodic)
        except (ValueError, DomainError):
            continue
        report = validate_against_rule(sig, plan.rule, plan.w0, n, plan.switch_times)
        if report.ok:
            return nodes
        last = report
    raise ValidationError(f"cannot realize stroke as a {kind} control: {last}", report=last)


def realize_plan(plans: Sequence[StrokePlan], kind: str = "smooth"):
    """Concatenate per-stroke controls into one signal and validate it end to end."""
    if kind not in ("smooth", "pwc"):
        raise ValueError("kind must be 'smooth' or 'pwc'")
    if not plans:
        raise ValueError("empty plan")
    all_nodes = []
    offset = 0.0
    expected = []
    for plan in plans:
        nodes = stroke_nodes(plan, kind)
        shifted = [(offset + t, th, u) for t, th, u in nodes]
        # node times: the stroke's own end time anchors the next stroke exactly
        shifted[-1] = (offset + plan.T, shifted[-1][1], shifted[-1][2])
        all_nodes.extend(shifted if not all_nodes else shifted[1:])
        expected.extend(offset + t for t in plan.switch_times)
        offset = offset + plan.T
    first, last = plans[0], plans[-1]
    periodic = first.theta0 == last.end_angle
    sig = _build(all_nodes, kind, periodic)
    report = validate_against_rule(sig, first.rule, first.w0, len(expected), expected)
    if not report.ok:
        raise ValidationError(f"realized control violates the plan: {report}", report=report)
    return sig


def predicted_total(plans: Sequence[StrokePlan]) -> float:
    return float(sum(pl.predicted_dx for pl in plans))
