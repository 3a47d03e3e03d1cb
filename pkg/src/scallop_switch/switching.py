"""Regime selection laws driven by the angular velocity ``u``.

Every rule is described by two things: the set of inputs that *force* each
regime, and "hold" everywhere else. Switching away from regime ``w`` happens
exactly when ``u`` enters the forced set of the other regime, which is
encoded by :meth:`exit_margin` being strictly positive. Sitting on a
threshold, or touching it without crossing, never switches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy import optimize

from .errors import CoherenceError, MissingHintError
from .model import Regime

HOLD = 0


@dataclass(frozen=True)
class Magnitude:
    """Ideal while ``|u| > M``, viscous while ``|u| < M``."""

    M: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("Magnitude threshold M must be positive")

    def forced(self, u):
        au = np.abs(u)
        return np.where(au > self.M, Regime.IDEAL, np.where(au < self.M, Regime.VISCOUS, HOLD))

    def exit_margin(self, w, u):
        au = np.abs(u)
        return au - self.M if Regime(w) is Regime.VISCOUS else self.M - au

    def crossed_threshold(self, w_from, u_before, u_after):
        if Regime(w_from) is Regime.IDEAL:
            return math.copysign(self.M, u_before)
        return math.copysign(self.M, u_after)

    @property
    def scale(self):
        return self.M

    def to_dict(self):
        return {"type": "magnitude", "M": self.M}


@dataclass(frozen=True)
class Sign:
    """Ideal while opening (``u > 0``), viscous while closing (``u < 0``)."""

    def forced(self, u):
        u = np.asarray(u)
        return np.where(u > 0, Regime.IDEAL, np.where(u < 0, Regime.VISCOUS, HOLD))

    def exit_margin(self, w, u):
        u = np.asarray(u, dtype=float)
        return u if Regime(w) is Regime.VISCOUS else -u

    def crossed_threshold(self, w_from, u_before, u_after):
        return 0.0

    @property
    def scale(self):
        return None

    def to_dict(self):
        return {"type": "sign"}


@dataclass(frozen=True)
class Thermostat:
    """Delayed relay: to ideal on upward crossings of ``eps``, to viscous on
    downward crossings of ``-eps``; holds inside ``[-eps, eps]``."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("Thermostat threshold eps must be positive")

    def forced(self, u):
        u = np.asarray(u)
        return np.where(u > self.eps, Regime.IDEAL, np.where(u < -self.eps, Regime.VISCOUS, HOLD))

    def exit_margin(self, w, u):
        u = np.asarray(u, dtype=float)
        return u - self.eps if Regime(w) is Regime.VISCOUS else -self.eps - u

    def crossed_threshold(self, w_from, u_before, u_after):
        return -self.eps if Regime(w_from) is Regime.IDEAL else self.eps

    @property
    def scale(self):
        return self.eps

    def to_dict(self):
        return {"type": "thermostat", "eps": self.eps}


@dataclass(frozen=True)
class Fixed:
    """Degenerate rule that never leaves regime ``w``."""

    w: Regime

    def __post_init__(self):
        object.__setattr__(self, "w", Regime(self.w))

    def forced(self, u):
        return np.full(np.shape(u), int(self.w))

    def exit_margin(self, w, u):
        return np.full(np.shape(u), -1.0)

    def crossed_threshold(self, w_from, u_before, u_after):
        raise AssertionError("a fixed rule never switches")

    @property
    def scale(self):
        return None

    def to_dict(self):
        return {"type": "fixed", "w": int(self.w)}


SwitchingRule = Union[Magnitude, Sign, Thermostat, Fixed]


def rule_from_dict(d) -> SwitchingRule:
    kind = d.get("type")
    if kind == "magnitude":
        return Magnitude(float(d["M"]))
    if kind == "sign":
        return Sign()
    if kind == "thermostat":
        return Thermostat(float(d["eps"]))
    if kind == "fixed":
        return Fixed(Regime(int(d["w"])))
    raise ValueError(f"unknown rule type {kind!r}")


@dataclass(frozen=True)
class SwitchEvent:
    t: float
    w_from: Regime
    w_to: Regime
    u_at_event: float

    def to_dict(self):
        return {"t": self.t, "from": int(self.w_from), "to": int(self.w_to), "u": self.u_at_event}


@dataclass(frozen=True)
class ThermostatState:
    """Incremental relay memory: current output and last input seen."""

    w: Regime
    last_u: Optional[float] = None

    def update(self, rule: SwitchingRule, u: float) -> "ThermostatState":
        f = int(rule.forced(u))
        w = self.w if f == HOLD else Regime(f)
        return ThermostatState(w, float(u))


def initial_regime(rule: SwitchingRule, u0: float, w0_hint: Optional[Regime] = None) -> Regime:
    forced = int(rule.forced(u0))
    if forced == HOLD:
        if w0_hint is None:
            raise MissingHintError(f"u0={u0!r} lies in the ambiguous zone of {rule!r}; a regime hint is required")
        return Regime(w0_hint)
    forced = Regime(forced)
    if w0_hint is not None and Regime(w0_hint) is not forced:
        raise CoherenceError(f"u0={u0!r} forces {forced.name} under {rule!r}, but w0={Regime(w0_hint).name}")
    return forced


def apply_rule(rule: SwitchingRule, u_values: Sequence[float], w0: Regime) -> np.ndarray:
    """Sampled relay: the regime after each input sample, starting from ``w0``."""
    state = ThermostatState(Regime(w0))
    out = np.empty(len(u_values), dtype=int)
    for i, u in enumerate(u_values):
        state = state.update(rule, u)
        out[i] = state.w
    return out


def _bisect_crossing(g, lo, hi, xtol):
    # g(lo) <= 0 < g(hi); Brent's method stops well inside xtol on smooth inputs
    if g(lo) == 0.0:
        return lo
    return optimize.brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


def find_switch_times(
    rule: SwitchingRule,
    sig,
    w0: Regime,
    h_scan: Optional[float] = None,
    xtol: float = 1e-10,
    t_span: Optional[tuple] = None,
) -> list:
    """All regime changes of ``rule`` driven by the control ``sig``.

    Each control piece is scanned on a grid of step ``h_scan`` (default
    ``T / 1e4``) augmented with the piece's velocity extrema, and crossings
    are refined with Brent's method to ``xtol``. Jumps at piece boundaries fire at
    the boundary itself.
    """
    t0, t1 = (0.0, sig.T) if t_span is None else (float(t_span[0]), float(t_span[1]))
    h_scan = sig.T / 1e4 if h_scan is None else h_scan
    w = Regime(w0)
    events = []
    breaks = np.asarray(sig.breaks, dtype=float)
    for k in range(len(breaks) - 1):
        a, b = max(breaks[k], t0), min(breaks[k + 1], t1)
        if b <= a:
            continue
        n = max(2, int(math.ceil((b - a) / h_scan)) + 1)
        grid = np.linspace(a, b, n)
        crit = sig.piece_critical_times(k)
        if crit is not None and len(crit):
            crit = np.asarray(crit, dtype=float)
            grid = np.union1d(grid, crit[(crit > a) & (crit < b)])
        u = sig.piece_u(k, grid)
        s = rule.exit_margin(w, u)
        j = 0
        while True:
            pos = np.flatnonzero(s[j:] > 0)
            if pos.size == 0:
                break
            j += int(pos[0])
            if j == 0:
                if a == t0:
                    # the window opens inside the other regime's forced set
                    raise CoherenceError(
                        f"input u={float(u[0])!r} at t={a!r} contradicts regime {w.name}"
                    )
                u_prev = float(sig.piece_u(k - 1, np.array([a]))[0])
                te = a
                u_ev = rule.crossed_threshold(w, u_prev, float(u[0]))
            else:
                g = lambda t, w=w: float(rule.exit_margin(w, sig.piece_u(k, np.array([t])))[0])  # noqa: E731
                te = _bisect_crossing(g, float(grid[j - 1]), float(grid[j]), xtol)
                u_ev = float(sig.piece_u(k, np.array([te]))[0])
            events.append(SwitchEvent(float(te), w, w.other, u_ev))
            w = w.other
            s = rule.exit_margin(w, u)
    return events


def regime_at(rule: SwitchingRule, events: Sequence[SwitchEvent], w0: Regime, t):
    """Right-continuous piecewise-constant regime reconstructed from events."""
    times = np.array([e.t for e in events], dtype=float)
    regimes = np.array([int(w0)] + [int(e.w_to) for e in events])
    idx = np.searchsorted(times, np.asarray(t, dtype=float), side="right")
    out = regimes[idx]
    return Regime(int(out)) if np.ndim(out) == 0 else out
