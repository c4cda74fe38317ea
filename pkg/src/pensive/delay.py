"""Boundary slide laws and their effective potentials.

A delay function assigns to each reflection the signed arc length the
bounce point slides along the boundary. It is stored both as l(p) of
the tangential momentum p = cos(theta) and as l~(theta) = l(cos theta)
of the incidence angle. The effective potential

    V(p) = integral_0^p q l'(q) dq,   V(0) = 0,

is what the generating function adds on top of the chord length.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import InvalidParameter, OutOfRange

_SQRT2 = math.sqrt(2.0)


class DelayFunction:
    """Slide law with momentum/angle forms, derivative, and potential."""

    def __init__(self, ell_p, dell_dp, *, tag="custom", params=None,
                 potential_p=None, dtheta_fn=None, theta_limits=None,
                 dtheta_range=None):
        if dell_dp is None:
            raise InvalidParameter("custom delays must supply dl/dp")
        self._ell_p = ell_p
        self._dell_dp = dell_dp
        self._potential_p = potential_p
        self._dtheta_fn = dtheta_fn
        self._theta_limits = theta_limits
        self._dtheta_range = dtheta_range
        self.tag = tag
        self.params = dict(params or {})

    # -- momentum form --------------------------------------------------

    def _checked_p(self, p):
        p = np.asarray(p, dtype=float)
        if np.any(np.abs(p) > 1.0 + 1e-12):
            raise OutOfRange("momentum must satisfy |p| <= 1")
        return np.clip(p, -1.0, 1.0)

    def ell(self, p):
        """Slide length as a function of p = cos(theta)."""
        return self._ell_p(self._checked_p(p))

    def dell_dp(self, p):
        return self._dell_dp(self._checked_p(p))

    # -- angle form -----------------------------------------------------

    def ell_theta(self, theta):
        return self.ell(np.cos(np.asarray(theta, dtype=float)))

    def dtheta(self, theta):
        """d l~/d theta; closed form for built-ins, chain rule otherwise."""
        theta = np.asarray(theta, dtype=float)
        if self._dtheta_fn is not None:
            return self._dtheta_fn(theta)
        return -np.sin(theta) * self.dell_dp(np.cos(theta))

    def theta_limits(self):
        """(limit of l~ at theta -> 0+, at theta -> pi-); may be infinite."""
        if self._theta_limits is not None:
            return self._theta_limits
        eps = 1e-9
        return (float(self.ell(1.0 - eps)), float(self.ell(-1.0 + eps)))

    def dtheta_range(self, n=1024):
        """(inf, sup) of d l~/d theta over (0, pi).

        Closed-form for built-in tags; otherwise a dense sample, so the
        bound is only as good as the grid.
        """
        if self._dtheta_range is not None:
            return self._dtheta_range
        th = np.linspace(0.0, math.pi, n + 2)[1:-1]
        v = self.dtheta(th)
        return float(np.min(v)), float(np.max(v))

    # -- potential -------------------------------------------------------

    def potential(self, p):
        """Effective potential V(p) with V(0) = 0."""
        p = self._checked_p(p)
        if self._potential_p is not None:
            return self._potential_p(p)
        scalar = np.ndim(p) == 0
        pv = np.atleast_1d(p)
        out = np.empty_like(pv)
        for i, pi in enumerate(pv):
            out[i] = quad(lambda q: q * self._dell_dp(q), 0.0, pi,
                          epsabs=1e-10, epsrel=1e-10, limit=200)[0]
        return float(out[0]) if scalar else out

    def __repr__(self):
        inner = ", ".join("%s=%g" % kv for kv in self.params.items())
        return "DelayFunction(%s(%s))" % (self.tag, inner)


# -- built-in slide laws -------------------------------------------------


def zero():
    z = np.zeros_like
    return DelayFunction(
        lambda p: z(np.asarray(p, dtype=float)),
        lambda p: z(np.asarray(p, dtype=float)),
        tag="zero",
        potential_p=lambda p: z(np.asarray(p, dtype=float)),
        dtheta_fn=lambda th: z(np.asarray(th, dtype=float)),
        theta_limits=(0.0, 0.0),
        dtheta_range=(0.0, 0.0),
    )


def constant(c):
    c = float(c)
    return DelayFunction(
        lambda p: np.full_like(np.asarray(p, dtype=float), c),
        lambda p: np.zeros_like(np.asarray(p, dtype=float)),
        tag="constant", params={"c": c},
        potential_p=lambda p: np.zeros_like(np.asarray(p, dtype=float)),
        dtheta_fn=lambda th: np.zeros_like(np.asarray(th, dtype=float)),
        theta_limits=(c, c),
        dtheta_range=(0.0, 0.0),
    )


def linear(slope):
    """l~(theta) = slope * theta."""
    c = float(slope)
    return DelayFunction(
        lambda p: c * np.arccos(np.clip(p, -1, 1)),
        lambda p: -c / np.sqrt(np.maximum(1.0 - p * p, 1e-300)),
        tag="linear", params={"slope": c},
        potential_p=lambda p: c * (np.sqrt(1.0 - np.minimum(p * p, 1.0)) - 1.0),
        dtheta_fn=lambda th: np.full_like(np.asarray(th, dtype=float), c),
        theta_limits=(0.0, c * math.pi),
        dtheta_range=(c, c),
    )


def puck(h):
    """Slide of a finite puck of height h on a cylinder: l~ = h*cot(theta)."""
    h = float(h)
    if h <= 0:
        raise InvalidParameter("puck height must be positive")
    return DelayFunction(
        lambda p: h * p / np.sqrt(np.maximum(1.0 - p * p, 1e-300)),
        lambda p: h / np.maximum(1.0 - p * p, 1e-300) ** 1.5,
        tag="puck", params={"h": h},
        potential_p=lambda p: h / np.sqrt(np.maximum(1.0 - p * p, 1e-300)) - h,
        dtheta_fn=lambda th: -h / np.sin(np.asarray(th, dtype=float)) ** 2,
        theta_limits=(math.inf, -math.inf),
        dtheta_range=(-math.inf, -h),
    )


def vortex(length):
    """Slide of the dipole split-and-rejoin cycle, L = half perimeter."""
    L = float(length)
    if L <= 0:
        raise InvalidParameter("half-perimeter must be positive")

    def dth(theta):
        c = np.cos(np.asarray(theta, dtype=float))
        return L * np.sin(theta) / (1.0 + c * c) ** 1.5

    return DelayFunction(
        lambda p: L * (1.0 - p / np.sqrt(1.0 + p * p)),
        lambda p: -L / (1.0 + p * p) ** 1.5,
        tag="vortex", params={"L": L},
        potential_p=lambda p: L / np.sqrt(1.0 + p * p) - L,
        dtheta_fn=dth,
        theta_limits=(L * (1.0 - 1.0 / _SQRT2), L * (1.0 + 1.0 / _SQRT2)),
        dtheta_range=(0.0, L),
    )


def vortex_for(curve):
    return vortex(curve.perimeter / 2.0)


# -- generalized puck ------------------------------------------------------


class PuckMetric:
    """Cylinder metric f(y) ds^2 + dy^2 on y in [0, 1], f >= 1, f(0)=f(1)=1."""

    def __init__(self, f, name="profile"):
        self.f = f
        self.name = name
        y = np.linspace(0.0, 1.0, 4097)
        fy = np.asarray(f(y), dtype=float)
        if fy.shape != y.shape:
            raise InvalidParameter("profile must evaluate elementwise")
        if fy.min() < 1.0 - 1e-12:
            raise InvalidParameter("profile must satisfy f >= 1")
        if abs(fy[0] - 1.0) > 1e-9 or abs(fy[-1] - 1.0) > 1e-9:
            raise InvalidParameter("profile must have f(0) = f(1) = 1")

    @classmethod
    def from_table(cls, y, fvals, name="table"):
        y = np.asarray(y, dtype=float)
        fvals = np.asarray(fvals, dtype=float)
        spl = CubicSpline(y, fvals)
        return cls(lambda t: np.maximum(spl(np.clip(t, 0, 1)), 1.0), name=name)

    @classmethod
    def named(cls, name, amp=0.5):
        if name == "flat":
            return cls(lambda y: np.ones_like(np.asarray(y, dtype=float)),
                       name="flat")
        if name == "bump":
            return cls(lambda y: 1.0 + amp * np.sin(np.pi * y) ** 2,
                       name="bump")
        if name == "double_bump":
            return cls(lambda y: 1.0 + amp * np.sin(2 * np.pi * y) ** 2,
                       name="double_bump")
        if name == "skew":
            return cls(lambda y: 1.0 + amp * (np.sin(np.pi * y) ** 2
                                              + 0.5 * np.sin(np.pi * y) ** 4
                                              * np.cos(np.pi * y)),
                       name="skew")
        raise InvalidParameter("unknown profile %r" % name)


def _gp_quad(metric, p, power):
    f = metric.f

    def integrand(y):
        fy = float(f(np.asarray(y)))
        root = 1.0 - p * p / fy
        if root <= 0:
            return math.inf
        return fy ** (-1.0) * root ** (-0.5 * power)

    val, _ = quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10, limit=500)
    return val


def generalized_puck_delay(metric, p):
    """l(p) for the geodesic crossing of the cylinder with metric f."""
    p = np.asarray(p, dtype=float)
    if np.any(np.abs(p) >= 1.0):
        raise OutOfRange("need |p| < 1 for a crossing geodesic")
    scalar = p.ndim == 0
    pv = np.atleast_1d(p)
    out = np.array([pi * _gp_quad(metric, float(pi), 1) for pi in pv])
    return float(out[0]) if scalar else out


def generalized_puck_potential(metric, p):
    """Crossing time (unnormalized potential) of the same geodesic."""
    p = np.asarray(p, dtype=float)
    if np.any(np.abs(p) >= 1.0):
        raise OutOfRange("need |p| < 1 for a crossing geodesic")
    scalar = p.ndim == 0

    def one(pi):
        def integrand(y):
            fy = float(metric.f(np.asarray(y)))
            root = 1.0 - pi * pi / fy
            if root <= 0:
                return math.inf
            return root ** -0.5

        return quad(integrand, 0.0, 1.0, epsabs=1e-10, epsrel=1e-10,
                    limit=500)[0]

    out = np.array([one(float(pi)) for pi in np.atleast_1d(p)])
    return float(out[0]) if scalar else out


def generalized_puck(metric):
    """DelayFunction backed by the metric quadratures."""

    def ell_p(p):
        p = np.clip(np.asarray(p, dtype=float), -1 + 1e-12, 1 - 1e-12)
        scalar = p.ndim == 0
        pv = np.atleast_1d(p)
        out = np.array([pi * _gp_quad(metric, float(pi), 1) for pi in pv])
        return float(out[0]) if scalar else out

    def dell(p):
        p = np.clip(np.asarray(p, dtype=float), -1 + 1e-12, 1 - 1e-12)
        scalar = p.ndim == 0
        pv = np.atleast_1d(p)
        out = np.array([_gp_quad(metric, float(pi), 3) for pi in pv])
        return float(out[0]) if scalar else out

    def pot(p):
        p = np.clip(np.asarray(p, dtype=float), -1 + 1e-12, 1 - 1e-12)
        scalar = p.ndim == 0
        pv = np.atleast_1d(p)
        v0 = generalized_puck_potential(metric, 0.0)
        out = generalized_puck_potential(metric, pv) - v0
        return float(out[0]) if scalar else out

    return DelayFunction(ell_p, dell, tag="generalized_puck",
                         params={"profile": metric.name},
                         potential_p=pot)


def from_callables(ell_p, dell_dp, tag="custom", params=None):
    """Custom slide law; the derivative must be supplied explicitly."""
    return DelayFunction(ell_p, dell_dp, tag=tag, params=params)


def delay_from_config(cfg, curve=None):
    kind = str(cfg.get("kind", "zero")).strip().lower()
    if kind == "zero":
        return zero()
    if kind == "constant":
        return constant(float(cfg["c"]))
    if kind == "linear":
        return linear(float(cfg["slope"]))
    if kind == "puck":
        return puck(float(cfg["h"]))
    if kind == "vortex":
        if "l" in cfg:
            return vortex(float(cfg["l"]))
        if curve is None:
            raise InvalidParameter("vortex delay needs L or a curve")
        return vortex_for(curve)
    if kind == "generalized_puck":
        if "path" in cfg:
            tab = np.loadtxt(cfg["path"], delimiter=",", ndmin=2)
            metric = PuckMetric.from_table(tab[:, 0], tab[:, 1])
        else:
            metric = PuckMetric.named(str(cfg.get("profile", "bump")),
                                      amp=float(cfg.get("amp", 0.5)))
        return generalized_puck(metric)
    raise InvalidParameter("unknown delay kind %r" % kind)
