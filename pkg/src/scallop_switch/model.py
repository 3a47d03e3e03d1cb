"""Swimmer parameters, regime velocity coefficients and their primitives.

Both regimes share the reduced form ``dx/dt = V_w(theta) * dtheta/dt``. Each
coefficient can be written as ``a sin(theta) / (1 - k_w^2 cos^2(theta))``
with a regime constant ``k_w^2``; the primitives follow from that form.

Units are whatever the caller feeds in (the worked example uses cm, g, s);
only ratios enter the reduced equations, so nothing is converted.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, RegularityError

#: Angles used by simulation and synthesis are confined to
#: ``[THETA_MARGIN, pi/2 - THETA_MARGIN]``.
THETA_MARGIN = 1e-3
HALF_PI = 0.5 * math.pi
# integration constant convention: F_w(pi/4) = 0
REFERENCE_ANGLE = 0.25 * math.pi


class Regime(enum.IntEnum):
    VISCOUS = 1
    IDEAL = 2

    @property
    def other(self) -> "Regime":
        return Regime.IDEAL if self is Regime.VISCOUS else Regime.VISCOUS


class RegularityWarning(UserWarning):
    """Emitted when the gap between primitives is evaluated off its monotone regime."""


@dataclass(frozen=True)
class ScallopParams:
    """Geometry and fluid constants of the swimmer.

    a, b: valve half-lengths along the major/minor axis (b < a).
    xi, eta: tangential and normal drag coefficients.
    m: lumped body mass in the ideal-fluid dynamics.
    rho: fluid density.
    """

    a: float = 2.0
    b: float = 0.1
    xi: float = 1.0
    eta: float = 2.0
    m: float = 1.0
    rho: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "xi", "eta", "m", "rho"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.b >= self.a:
            raise ValueError(f"slender valves need b < a, got a={self.a}, b={self.b}")

    @property
    def k2_viscous(self) -> float:
        return (self.eta - self.xi) / self.eta

    @property
    def k2_ideal(self) -> float:
        pa = self.rho * math.pi
        return pa * (self.a**2 - self.b**2) / (self.m + pa * self.a**2)

    @property
    def regularity(self) -> float:
        """``m (xi - eta) + rho pi (xi a^2 - eta b^2)``; positive iff the gap increases."""
        return self.m * (self.xi - self.eta) + self.rho * math.pi * (
            self.xi * self.a**2 - self.eta * self.b**2
        )

    @property
    def regular(self) -> bool:
        return self.regularity > 0

    def require_regular(self):
        if not self.regular:
            raise RegularityError(
                "parameters violate the regularity condition "
                f"m(xi-eta) + rho*pi*(xi*a^2 - eta*b^2) = {self.regularity:.6g} <= 0; "
                "the regime gap is not increasing"
            )


@dataclass(frozen=True)
class State:
    x: float
    theta: float
    w: Regime

    def __post_init__(self):
        check_angle(self.theta)


def check_angle(theta, margin: float = THETA_MARGIN, t=None):
    """Raise :class:`DomainError` unless every angle lies in ``[margin, pi/2 - margin]``."""
    th = np.asarray(theta, dtype=float)
    bad = ~((th >= margin) & (th <= HALF_PI - margin))
    if np.any(bad):
        i = int(np.flatnonzero(bad.ravel())[0])
        value = float(th.ravel()[i])
        when = None
        if t is not None:
            when = float(np.broadcast_to(np.asarray(t, dtype=float), th.shape).ravel()[i])
        where = f" at t={when:.10g}" if when is not None else ""
        raise DomainError(
            f"angle {value:.10g} outside [{margin:g}, pi/2-{margin:g}]{where}",
            t=when,
            theta=value,
        )


def _check_formula_domain(theta):
    th = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(th)) or np.any(th < -THETA_MARGIN) or np.any(th > HALF_PI + THETA_MARGIN):
        raise DomainError(f"angle outside (0, pi/2) beyond the {THETA_MARGIN:g} margin")
    return th


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def v_viscous(p: ScallopParams, theta):
    th = _check_formula_domain(theta)
    s, c = np.sin(th), np.cos(th)
    return _scalar_or_array(p.a * p.eta * s / (p.xi * c**2 + p.eta * s**2))


def v_ideal(p: ScallopParams, theta):
    th = _check_formula_domain(theta)
    s, c = np.sin(th), np.cos(th)
    pa = p.rho * math.pi
    return _scalar_or_array(
        p.a * s * (p.m + pa * p.a**2) / (p.m + pa * p.b**2 * c**2 + pa * p.a**2 * s**2)
    )


def velocity(p: ScallopParams, w: Regime, theta):
    return v_ideal(p, theta) if Regime(w) is Regime.IDEAL else v_viscous(p, theta)


def _k2(p: ScallopParams, w: Regime) -> float:
    return p.k2_ideal if Regime(w) is Regime.IDEAL else p.k2_viscous


def primitive_method(p: ScallopParams, w: Regime) -> str:
    """Which closed form backs :func:`f_primitive` for this regime."""
    k2 = _k2(p, w)
    if k2 > 0:
        return "arctanh"
    if k2 < 0:
        return "arctan"
    return "cosine"


def _raw_primitive(a: float, k2: float, c):
    # antiderivative of a sin / (1 - k2 cos^2), no constant fixed
    if k2 > 0:
        k = math.sqrt(k2)
        return -(a / k) * np.arctanh(k * c)
    if k2 < 0:
        q = math.sqrt(-k2)
        return -(a / q) * np.arctan(q * c)
    return -a * c


def f_primitive(p: ScallopParams, w: Regime, theta, method: str = "closed"):
    """Antiderivative of ``V_w`` normalised so that ``F_w(pi/4) = 0``.

    ``method="quad"`` integrates ``V_w`` adaptively instead of using the
    closed form; results agree to quadrature accuracy.
    """
    th = _check_formula_domain(theta)
    w = Regime(w)
    if method == "quad":
        f = lambda s: velocity(p, w, s)  # noqa: E731
        out = np.vectorize(
            lambda x: integrate.quad(f, REFERENCE_ANGLE, x, epsabs=1e-14, epsrel=1e-13, limit=200)[0]
        )(th)
        return _scalar_or_array(out)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    k2 = _k2(p, w)
    out = _raw_primitive(p.a, k2, np.cos(th)) - _raw_primitive(p.a, k2, math.cos(REFERENCE_ANGLE))
    return _scalar_or_array(out)


def gap(p: ScallopParams, theta):
    """``F_ideal - F_viscous``; strictly increasing under the regularity condition."""
    if not p.regular:
        warnings.warn(
            f"regularity condition fails (value {p.regularity:.6g}); gap is not increasing",
            RegularityWarning,
            stacklevel=2,
        )
    return _scalar_or_array(
        np.asarray(f_primitive(p, Regime.IDEAL, theta)) - np.asarray(f_primitive(p, Regime.VISCOUS, theta))
    )


def gap_derivative(p: ScallopParams, theta):
    """Closed form of ``V_ideal - V_viscous``; sign equals the regularity sign."""
    th = _check_formula_domain(theta)
    s, c = np.sin(th), np.cos(th)
    k1, k2 = p.k2_viscous, p.k2_ideal
    return _scalar_or_array(p.a * s * c**2 * (k2 - k1) / ((1 - k1 * c**2) * (1 - k2 * c**2)))


def segment_drift(p: ScallopParams, w: Regime, theta_start, theta_end) -> float:
    """Displacement accumulated while the angle moves between two values in one regime."""
    return float(f_primitive(p, w, theta_end) - f_primitive(p, w, theta_start))
