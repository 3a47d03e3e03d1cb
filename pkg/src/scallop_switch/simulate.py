"""Propagation of ``dx/dt = V_w(theta) u``, ``dtheta/dt = u`` under a switching rule.

Two independent routes are provided. :func:`propagate_exact` never steps the
ODE: between switch events the regime is fixed, so ``x`` changes by a
difference of primitives. :func:`propagate_numeric` is a classical RK4
integrator with steps aligned to events and control breakpoints, kept as an
oracle for the exact route.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import CoherenceError
from .model import THETA_MARGIN, Regime, ScallopParams, State, check_angle, f_primitive, gap, velocity
from .switching import SwitchingRule, find_switch_times, initial_regime, regime_at

DEFAULT_SAMPLES = 701


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    theta: np.ndarray
    u: np.ndarray
    w: np.ndarray
    events: list
    delta_x: float
    method: str = "exact"

    @property
    def final_state(self) -> State:
        return State(float(self.x[-1]), float(self.theta[-1]), Regime(int(self.w[-1])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["t", "x", "theta", "u", "w"])
        for row in zip(self.t, self.x, self.theta, self.u, self.w):
            writer.writerow([repr(float(v)) for v in row[:4]] + [int(row[4])])
        return buf.getvalue()


def _window(sig, t_span):
    return (0.0, float(sig.T)) if t_span is None else (float(t_span[0]), float(t_span[1]))


def _right_piece(sig, t):
    k = int(np.searchsorted(sig.breaks, t, side="right")) - 1
    return min(max(k, 0), len(sig.breaks) - 2)


def _check_start(rule, sig, s0: State, t0: float):
    theta0 = float(sig.piece_theta(_right_piece(sig, t0), np.array([t0]))[0])
    if abs(theta0 - s0.theta) > 1e-9:
        raise CoherenceError(f"initial angle {s0.theta!r} differs from control angle {theta0!r} at t={t0}")
    u0 = float(sig.piece_u(_right_piece(sig, t0), np.array([t0]))[0])
    initial_regime(rule, u0, s0.w)


def propagate_exact(
    p: ScallopParams,
    rule: SwitchingRule,
    sig,
    s0: State,
    samples: int = DEFAULT_SAMPLES,
    xtol: float = 1e-10,
    t_span: Optional[tuple] = None,
    margin: float = THETA_MARGIN,
) -> Trajectory:
    """Exact propagation by primitive differences between switch events."""
    t0, t1 = _window(sig, t_span)
    _check_start(rule, sig, s0, t0)
    sig.check_domain(margin)
    events = find_switch_times(rule, sig, s0.w, xtol=xtol, t_span=(t0, t1))

    bounds = np.array([t0] + [e.t for e in events] + [t1])
    seg_w = [Regime(s0.w)] + [e.w_to for e in events]
    th_bounds = np.asarray(sig.evaluate(bounds)[0], dtype=float)
    x_bounds = np.empty(len(bounds))
    x_bounds[0] = s0.x
    for i, w in enumerate(seg_w):
        x_bounds[i + 1] = x_bounds[i] + (f_primitive(p, w, th_bounds[i + 1]) - f_primitive(p, w, th_bounds[i]))

    inner = np.asarray(sig.breaks, dtype=float)
    inner = inner[(inner > t0) & (inner < t1)]
    t = np.unique(np.concatenate([np.linspace(t0, t1, samples), bounds, inner]))
    theta, u = sig.evaluate(t)
    theta = np.asarray(theta, dtype=float)
    seg = np.searchsorted(bounds[1:-1], t, side="right")
    w_arr = np.array([int(seg_w[i]) for i in seg])
    x = np.empty_like(t)
    for i, w in enumerate(seg_w):
        mask = seg == i
        if np.any(mask):
            x[mask] = x_bounds[i] + (np.asarray(f_primitive(p, w, theta[mask])) - f_primitive(p, w, th_bounds[i]))
    # the final sample closes the last segment exactly
    x[-1] = x_bounds[-1]
    return Trajectory(t, x, theta, np.asarray(u, dtype=float), w_arr, events, float(x[-1] - x[0]), "exact")


def _rk4_interval(p, w, sig, k, a, b, h, x0, th0):
    """RK4 on ``[a, b]`` with equal steps no longer than ``h``.

    The right-hand side never depends on ``x``, and ``theta`` only through
    ``u(t)``, so the stage values can be formed for all steps at once; the
    arithmetic is the same as the sequential scheme.
    """
    n = max(1, int(math.ceil((b - a) / h - 1e-9)))
    tn = a + (b - a) * np.arange(n + 1) / n
    tn[-1] = b
    hs = np.diff(tn)
    ts = tn[:-1]
    u1 = sig.piece_u(k, ts)
    u2 = sig.piece_u(k, ts + 0.5 * hs)
    u4 = sig.piece_u(k, tn[1:])
    dth = hs / 6.0 * (u1 + 4.0 * u2 + u4)
    th = np.concatenate([[th0], th0 + np.cumsum(dth)])
    thn = th[:-1]
    k1 = velocity(p, w, thn) * u1
    k2 = velocity(p, w, thn + 0.5 * hs * u1) * u2
    k3 = velocity(p, w, thn + 0.5 * hs * u2) * u2
    k4 = velocity(p, w, thn + hs * u2) * u4
    dx = hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    x = np.concatenate([[x0], x0 + np.cumsum(dx)])
    return tn, x, th, np.concatenate([[u1[0]], u4])


def propagate_numeric(
    p: ScallopParams,
    rule: SwitchingRule,
    sig,
    s0: State,
    h: float = 1e-3,
    xtol: float = 1e-10,
    t_span: Optional[tuple] = None,
    margin: float = THETA_MARGIN,
) -> Trajectory:
    """Fixed-step RK4 of ``(x, theta)``; no step straddles an event or a control break."""
    if not h > 0:
        raise ValueError("step must be positive")
    t0, t1 = _window(sig, t_span)
    _check_start(rule, sig, s0, t0)
    sig.check_domain(margin)
    events = find_switch_times(rule, sig, s0.w, xtol=xtol, t_span=(t0, t1))
    brk = np.asarray(sig.breaks, dtype=float)
    cuts = np.unique(np.concatenate([[t0, t1], brk[(brk > t0) & (brk < t1)], [e.t for e in events]]))
    ts, xs, ths, us, ws = [], [], [], [], []
    x, th = float(s0.x), float(s0.theta)
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        k = int(sig.piece_index(mid)) if hasattr(sig, "piece_index") else 0
        w = regime_at(rule, events, s0.w, a)
        tn, xn, thn, un = _rk4_interval(p, w, sig, k, a, b, h, x, th)
        sl = slice(None) if not ts else slice(1, None)
        ts.append(tn[sl]); xs.append(xn[sl]); ths.append(thn[sl]); us.append(un[sl])
        ws.append(np.full(len(tn[sl]), int(w)))
        x, th = float(xn[-1]), float(thn[-1])
    t = np.concatenate(ts)
    xx = np.concatenate(xs)
    return Trajectory(
        t, xx, np.concatenate(ths), np.concatenate(us), np.concatenate(ws), events, float(xx[-1] - xx[0]), "rk4"
    )


class StrokeCase(enum.Enum):
    """Initial regime and number of switches of a periodic stroke."""

    VISCOUS_HOLD = (1, 1)  # thermostat, in-band start on the viscous branch
    IDEAL_HOLD = (2, 1)  # thermostat, in-band start on the ideal branch
    IDEAL_TWO = (2, 2)  # thermostat u0 > eps, sign rule u0 > 0
    VISCOUS_TWO = (1, 2)  # thermostat u0 < -eps, sign rule u0 < 0
    IDEAL_FOUR = (2, 4)  # magnitude |u0| > M
    VISCOUS_FOUR = (1, 4)  # magnitude |u0| < M

    @property
    def w0(self) -> Regime:
        return Regime(self.value[0])

    @property
    def n_angles(self) -> int:
        return self.value[1]


def stroke_displacement(p: ScallopParams, case: StrokeCase, angles: Sequence[float], theta0: Optional[float] = None):
    """Net displacement of one periodic stroke from its switching angles.

    ``theta0`` (the start/end angle) is needed only by the one-switch cases.
    """
    angles = [float(a) for a in angles]
    if len(angles) != case.n_angles:
        raise ValueError(f"{case.name} takes {case.n_angles} angles, got {len(angles)}")
    check_angle(angles)
    F1 = lambda th: f_primitive(p, Regime.VISCOUS, th)  # noqa: E731
    F2 = lambda th: f_primitive(p, Regime.IDEAL, th)  # noqa: E731
    if case.n_angles == 1:
        if theta0 is None:
            raise ValueError(f"{case.name} needs theta0")
        check_angle(theta0)
        (t1,) = angles
        if case is StrokeCase.VISCOUS_HOLD:
            return F1(t1) - F1(theta0) + F2(theta0) - F2(t1)
        return F2(t1) - F2(theta0) + F1(theta0) - F1(t1)
    if case is StrokeCase.IDEAL_TWO:
        t1, t2 = angles
        return F2(t1) + F1(t2) - F1(t1) - F2(t2)
    if case is StrokeCase.VISCOUS_TWO:
        t1, t2 = angles
        return F1(t1) + F2(t2) - F2(t1) - F1(t2)
    g = [gap(p, a) for a in angles]
    if case is StrokeCase.IDEAL_FOUR:
        return g[0] + g[2] - g[1] - g[3]
    return g[1] + g[3] - g[0] - g[2]


def skeleton_displacement(
    p: ScallopParams,
    w0: Regime,
    theta_start: float,
    angles: Sequence[float],
    theta_end: Optional[float] = None,
) -> float:
    """Displacement of any path given its start angle, switch angles and end angle.

    Regimes alternate from ``w0`` at each switch; periodic when ``theta_end``
    is omitted.
    """
    theta_end = theta_start if theta_end is None else theta_end
    pts = [theta_start, *angles, theta_end]
    w = Regime(w0)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += f_primitive(p, w, b) - f_primitive(p, w, a)
        w = w.other
    return float(total)


def observed_order(steps: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def convergence_scenarios(seed: int = 2024, n: int = 10, steps: Sequence[float] = (4e-3, 2e-3, 1e-3)):
    """RK4 errors against exact propagation for ``n`` switching scenarios.

    Scenarios alternate between the sign rule and a thermostat, each driven
    by a random unit-period Fourier control; yields ``(name, errors)``.
    """
    from .control import random_fourier_control
    from .switching import Sign, Thermostat

    p = ScallopParams()
    rng = np.random.default_rng(seed)
    for i in range(n):
        rule = Sign() if i % 2 == 0 else Thermostat(0.5)
        sig = random_fourier_control(rng, T=1.0, n_harmonics=3)
        u0 = float(sig.u(0.0))
        w0 = initial_regime(rule, u0, Regime.VISCOUS if int(rule.forced(u0)) == 0 else None)
        s0 = State(0.0, float(sig.theta(0.0)), w0)
        exact = propagate_exact(p, rule, sig, s0, samples=2).delta_x
        errors = [abs(propagate_numeric(p, rule, sig, s0, h=h).delta_x - exact) for h in steps]
        yield f"{type(rule).__name__.lower()}-{i}", errors
