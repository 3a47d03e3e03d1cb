"""Angular-velocity controls on ``[0, T]``.

A control stores the opening angle ``theta(t)`` piecewise; the input is its
time derivative ``u``. Three kinds exist:

* ``hermite``: cubic Hermite per piece, C1 in ``theta``, matching ``(theta, u)``
  at every node;
* ``pwc``: constant ``u`` per piece, ``theta`` piecewise linear;
* ``polynomial``: a single global polynomial through all node constraints.

All signals share a small duck-typed interface used by the switching and
simulation code: ``T``, ``breaks``, ``piece_u``, ``piece_theta``,
``piece_critical_times``, ``evaluate`` and ``check_domain``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InfeasibleError
from .model import THETA_MARGIN, Regime, check_angle
from .switching import SwitchingRule, find_switch_times, initial_regime


@dataclass(frozen=True)
class NodeConstraints:
    """Ordered ``(t, theta, u)`` nodes; ``periodic`` demands equal end values."""

    times: tuple
    thetas: tuple
    us: tuple
    periodic: bool = True

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", tuple(float(x) for x in self.times))
        object.__setattr__(self, "thetas", tuple(float(x) for x in self.thetas))
        object.__setattr__(self, "us", tuple(float(x) for x in self.us))
        if not (len(self.times) == len(self.thetas) == len(self.us)) or len(self.times) < 2:
            raise ValueError("need at least two nodes with matching t, theta, u")
        if t[0] != 0.0:
            raise ValueError("first node must sit at t=0")
        if np.any(np.diff(t) <= 0):
            raise ValueError("node times must be strictly increasing")
        check_angle(self.thetas, t=self.times)
        if self.periodic and (self.thetas[0] != self.thetas[-1] or self.us[0] != self.us[-1]):
            raise ValueError("periodic constraints need theta(T)=theta(0) and u(T)=u(0)")

    @classmethod
    def from_nodes(cls, nodes, periodic=True):
        t, th, u = zip(*nodes)
        return cls(t, th, u, periodic)

    @property
    def T(self):
        return self.times[-1]


def _hermite_theta(ta, L, th_a, th_b, u_a, u_b, t):
    s = (t - ta) / L
    s2, s3 = s * s, s * s * s
    return (
        th_a * (2 * s3 - 3 * s2 + 1)
        + L * u_a * (s3 - 2 * s2 + s)
        + th_b * (3 * s2 - 2 * s3)
        + L * u_b * (s3 - s2)
    )


def _hermite_u(ta, L, th_a, th_b, u_a, u_b, t):
    # written so both endpoints reproduce the node rates bit-exactly
    s = (t - ta) / L
    s2 = s * s
    return (
        (th_b - th_a) * (6 * s - 6 * s2) / L
        + u_a * (3 * s2 - 4 * s + 1)
        + u_b * (3 * s2 - 2 * s)
    )


def _roots_in_unit(coeffs):
    """Real roots in (0, 1) of a polynomial given highest power first."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size <= 1:
        return np.empty(0)
    r = np.roots(c)
    r = r[np.abs(r.imag) < 1e-12].real
    return np.sort(r[(r > 0) & (r < 1)])


@dataclass(frozen=True, eq=False)
class ControlSignal:
    kind: str
    breaks: np.ndarray
    thetas: np.ndarray
    us: np.ndarray
    coeffs: Optional[np.ndarray] = None  # polynomial kind: theta in powers of t/T, lowest first

    @property
    def T(self) -> float:
        return float(self.breaks[-1])

    @property
    def n_pieces(self) -> int:
        return len(self.breaks) - 1

    def piece_index(self, t):
        """Piece holding ``t`` with ``(t_k, t_{k+1}]`` ownership; ``t=0`` maps to piece 0."""
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.breaks, t, side="left") - 1
        return np.clip(k, 0, self.n_pieces - 1)

    def piece_theta(self, k, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "polynomial":
            return np.polynomial.polynomial.polyval(t / self.T, self.coeffs)
        ta, tb = self.breaks[k], self.breaks[k + 1]
        if self.kind == "pwc":
            s = (t - ta) / (tb - ta)
            return (1 - s) * self.thetas[k] + s * self.thetas[k + 1]
        return _hermite_theta(ta, tb - ta, self.thetas[k], self.thetas[k + 1], self.us[k], self.us[k + 1], t)

    def piece_u(self, k, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "polynomial":
            d = np.polynomial.polynomial.polyder(self.coeffs)
            return np.polynomial.polynomial.polyval(t / self.T, d) / self.T
        ta, tb = self.breaks[k], self.breaks[k + 1]
        if self.kind == "pwc":
            return np.full(t.shape, (self.thetas[k + 1] - self.thetas[k]) / (tb - ta))
        return _hermite_u(ta, tb - ta, self.thetas[k], self.thetas[k + 1], self.us[k], self.us[k + 1], t)

    def _u_poly_unit(self, k):
        """``u`` on piece k as a polynomial in the local unit variable (highest power first)."""
        if self.kind == "pwc":
            return np.array([(self.thetas[k + 1] - self.thetas[k]) / (self.breaks[k + 1] - self.breaks[k])])
        if self.kind == "polynomial":
            d = np.polynomial.polynomial.polyder(self.coeffs) / self.T
            return d[::-1]
        L = self.breaks[k + 1] - self.breaks[k]
        d = (self.thetas[k + 1] - self.thetas[k]) / L
        ua, ub = self.us[k], self.us[k + 1]
        return np.array([-6 * d + 3 * ua + 3 * ub, 6 * d - 4 * ua - 2 * ub, ua])

    def _to_time(self, k, s):
        if self.kind == "polynomial":
            return s * self.T
        return self.breaks[k] + s * (self.breaks[k + 1] - self.breaks[k])

    def piece_critical_times(self, k):
        """Interior times where ``u`` has a local extremum on piece k."""
        return self._to_time(k, _roots_in_unit(np.polyder(self._u_poly_unit(k))))

    def piece_theta_extrema_times(self, k):
        return self._to_time(k, _roots_in_unit(self._u_poly_unit(k)))

    def evaluate(self, t):
        """``(theta, u)`` at ``t``; ``u`` is the left limit at interior breaks."""
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0) or np.any(t_arr > self.T):
            raise ValueError(f"time outside [0, {self.T}]")
        k = self.piece_index(t_arr)
        if t_arr.ndim == 0:
            k = int(k)
            return float(self.piece_theta(k, t_arr)), float(self.piece_u(k, t_arr))
        th = np.empty(t_arr.shape)
        u = np.empty(t_arr.shape)
        for kk in np.unique(k):
            mask = k == kk
            th[mask] = self.piece_theta(int(kk), t_arr[mask])
            u[mask] = self.piece_u(int(kk), t_arr[mask])
        return th, u

    def theta(self, t):
        return self.evaluate(t)[0]

    def u(self, t):
        return self.evaluate(t)[1]

    def theta_range(self):
        """Exact ``(min, max, t_min, t_max)`` of ``theta`` over ``[0, T]``."""
        ts = [np.asarray(self.breaks, dtype=float)]
        for k in range(self.n_pieces):
            ts.append(np.atleast_1d(self.piece_theta_extrema_times(k)))
        ts = np.unique(np.concatenate(ts))
        th = self.theta(ts)
        return float(th.min()), float(th.max()), float(ts[th.argmin()]), float(ts[th.argmax()])

    def check_domain(self, margin: float = THETA_MARGIN):
        lo, hi, tlo, thi = self.theta_range()
        check_angle(lo, margin, t=tlo)
        check_angle(hi, margin, t=thi)

    def to_dict(self):
        d = {
            "kind": self.kind,
            "nodes": [[float(t), float(th), float(u)] for t, th, u in zip(self.breaks, self.thetas, self.us)],
        }
        if self.coeffs is not None:
            d["coeffs"] = [float(c) for c in self.coeffs]
        return d


@dataclass(frozen=True, eq=False)
class FourierControl:
    """Periodic angle ``center + sum_k amp_k sin(2 pi k t / T + phase_k)``."""

    T: float
    center: float
    amps: tuple
    phases: tuple

    @property
    def breaks(self):
        return np.array([0.0, self.T])

    def _phase(self, t):
        # reduce to [0, 1) so theta(T) reproduces theta(0) bit-exactly
        return np.mod(np.asarray(t, dtype=float), self.T) / self.T

    def piece_theta(self, k, t):
        tau = self._phase(t)
        out = np.full(np.shape(tau), self.center, dtype=float)
        for j, (a, ph) in enumerate(zip(self.amps, self.phases), start=1):
            out = out + a * np.sin(2 * math.pi * j * tau + ph)
        return out

    def piece_u(self, k, t):
        tau = self._phase(t)
        out = np.zeros(np.shape(tau))
        for j, (a, ph) in enumerate(zip(self.amps, self.phases), start=1):
            out = out + a * (2 * math.pi * j / self.T) * np.cos(2 * math.pi * j * tau + ph)
        return out

    def piece_critical_times(self, k):
        return None

    def evaluate(self, t):
        th, u = self.piece_theta(0, t), self.piece_u(0, t)
        if np.ndim(t) == 0:
            return float(th), float(u)
        return th, u

    def theta(self, t):
        return self.evaluate(t)[0]

    def u(self, t):
        return self.evaluate(t)[1]

    def check_domain(self, margin: float = THETA_MARGIN):
        ts = np.linspace(0.0, self.T, 20001)
        th = self.piece_theta(0, ts)
        check_angle(th, margin, t=ts)

    def to_dict(self):
        return {"kind": "fourier", "T": self.T, "center": self.center, "amps": list(self.amps), "phases": list(self.phases)}


def random_fourier_control(rng, T=1.0, n_harmonics=3, margin=THETA_MARGIN, fill=0.95):
    """Random periodic angle profile kept inside the admissible interval."""
    lo, hi = margin, 0.5 * math.pi - margin
    center = rng.uniform(lo + 0.1, hi - 0.1)
    room = fill * min(center - lo, hi - center)
    raw = rng.uniform(-1.0, 1.0, n_harmonics)
    amps = raw / np.sum(np.abs(raw)) * room * rng.uniform(0.2, 1.0)
    phases = rng.uniform(0, 2 * math.pi, n_harmonics)
    return FourierControl(float(T), float(center), tuple(float(a) for a in amps), tuple(float(p) for p in phases))


def build_smooth_control(c: NodeConstraints, check: bool = True) -> ControlSignal:
    """Per-piece cubic Hermite interpolant of ``theta`` through every node."""
    sig = ControlSignal(
        "hermite",
        np.asarray(c.times, dtype=float),
        np.asarray(c.thetas, dtype=float),
        np.asarray(c.us, dtype=float),
    )
    if check:
        sig.check_domain()
    return sig


def build_piecewise_constant(c: NodeConstraints, check: bool = True) -> ControlSignal:
    """Constant rate per piece; ``theta`` is linear between node angles.

    The stored node rates are the left limits of ``u`` (the first node keeps
    the first piece's rate).
    """
    t = np.asarray(c.times, dtype=float)
    th = np.asarray(c.thetas, dtype=float)
    rates = np.diff(th) / np.diff(t)
    us = np.concatenate([[rates[0]], rates])
    sig = ControlSignal("pwc", t, th, us)
    if check:
        sig.check_domain()
    return sig


def build_global_polynomial(c: NodeConstraints, check: bool = True) -> ControlSignal:
    """Single polynomial of degree ``2n-1`` matching all ``n`` node pairs."""
    T = c.T
    s = np.asarray(c.times) / T
    n = len(s)
    deg = 2 * n - 1
    A = np.zeros((2 * n, deg + 1))
    rhs = np.zeros(2 * n)
    for i, si in enumerate(s):
        A[2 * i] = si ** np.arange(deg + 1)
        A[2 * i + 1, 1:] = np.arange(1, deg + 1) * si ** np.arange(deg)
        rhs[2 * i] = c.thetas[i]
        rhs[2 * i + 1] = c.us[i] * T
    coeffs = np.linalg.solve(A, rhs)
    sig = ControlSignal(
        "polynomial",
        np.array([0.0, T]),
        np.array([c.thetas[0], c.thetas[-1]]),
        np.array([c.us[0], c.us[-1]]),
        coeffs=coeffs,
    )
    if check:
        sig.check_domain()
    return sig


BUILDERS = {
    "smooth": build_smooth_control,
    "hermite": build_smooth_control,
    "pwc": build_piecewise_constant,
    "polynomial": build_global_polynomial,
}


def evaluate(sig, t):
    return sig.evaluate(t)


def signal_from_dict(d):
    kind = d.get("kind", "smooth")
    if kind == "fourier":
        return FourierControl(float(d["T"]), float(d["center"]), tuple(d["amps"]), tuple(d["phases"]))
    if kind not in BUILDERS:
        raise ValueError(f"unknown control kind {kind!r}")
    nodes = d["nodes"]
    if kind == "polynomial" and "coeffs" in d:
        t, th, u = (np.array(v, dtype=float) for v in zip(*nodes))
        return ControlSignal("polynomial", t, th, u, coeffs=np.array(d["coeffs"], dtype=float))
    c = NodeConstraints.from_nodes(nodes, periodic=bool(d.get("periodic", False)))
    return BUILDERS[kind](c)


@dataclass
class ValidationReport:
    ok: bool
    events: list
    problems: list = field(default_factory=list)

    def __str__(self):
        if self.ok:
            return f"ok ({len(self.events)} events)"
        return "; ".join(self.problems)


def validate_against_rule(
    sig,
    rule: SwitchingRule,
    w0: Regime,
    expected_events: int,
    expected_times: Optional[Sequence[float]] = None,
    time_tol: float = 1e-6,
    margin: float = THETA_MARGIN,
) -> ValidationReport:
    """Check that ``sig`` switches exactly as planned and stays in the angle domain."""
    problems = []
    try:
        initial_regime(rule, float(sig.piece_u(0, np.array([0.0]))[0]), w0)
    except Exception as exc:  # coherence or missing hint
        return ValidationReport(False, [], [f"initial regime: {exc}"])
    try:
        sig.check_domain(margin)
    except DomainError as exc:
        problems.append(f"domain: {exc}")
    events = find_switch_times(rule, sig, w0)
    if len(events) != expected_events:
        extra = ", ".join(f"t={e.t:.6g} ({e.w_from.name}->{e.w_to.name})" for e in events)
        problems.append(f"expected {expected_events} switch events, found {len(events)}: [{extra}]")
    elif expected_times is not None:
        for e, te in zip(events, expected_times):
            if abs(e.t - te) > time_tol:
                problems.append(f"switch at t={e.t:.10g}, planned t={te:.10g}")
    return ValidationReport(not problems, events, problems)


def require_valid(sig, rule, w0, expected_events, expected_times=None):
    report = validate_against_rule(sig, rule, w0, expected_events, expected_times)
    if not report.ok:
        raise InfeasibleError(f"control violates the switching plan: {report}")
    return report
