"""Point-vortex dynamics in bounded domains and the dipole limit models.

Circulation is counterclockwise-positive and the stream structure uses
the positive-type Green's function, so a single positive vortex drifts
along the boundary with the domain on its left. The motion is the
Kirchhoff system

    dz_i/dt = -i grad_z [ sum_{j != i} G_j G(z_i, z_j) + G_i R(z_i) / 2 ]

whose Hamiltonian and (half-plane) horizontal momentum are monitored
during integration.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import delay as delay_mod
from . import geometry as geo
from .errors import (AmbiguousEvent, BoundarySingularity,
                     DiagonalSingularity, EventStop, InvalidAngle,
                     InvalidParameter, InvalidPoint, ReportIncomplete,
                     Unsupported)

TWO_PI = 2.0 * math.pi
CHI = 1.0 + math.sqrt(2.0)
PHI = 0.5 * (1.0 + math.sqrt(5.0))


@dataclass(frozen=True)
class MetallicConstants:
    """Silver and golden thresholds of the pair interaction."""

    chi: float = CHI
    phi: float = PHI


METALLIC = MetallicConstants()


def _as_z(point):
    if isinstance(point, complex):
        return point
    arr = np.asarray(point, dtype=float).ravel()
    if arr.size == 1:
        return complex(arr[0])
    if arr.size != 2:
        raise InvalidPoint("points are (x, y) pairs or complex numbers")
    return complex(arr[0], arr[1])


class HalfPlane:
    """Upper half-plane y > 0 with the x-axis as the wall."""

    name = "half_plane"
    scale = 1.0

    def inside(self, z):
        return z.imag > 0.0

    def boundary_distance(self, z):
        return z.imag

    def greens(self, z, w):
        return (math.log(abs(z - np.conj(w))) -
                math.log(abs(z - w))) / TWO_PI

    def grad_greens(self, z, w):
        d, dbar = z - w, z - np.conj(w)
        return (-d / abs(d) ** 2 + dbar / abs(dbar) ** 2) / TWO_PI

    def robin(self, z):
        return math.log(2.0 * z.imag) / TWO_PI

    def grad_robin(self, z):
        return 1j / (TWO_PI * z.imag)

    def curve(self):
        raise Unsupported("the half-plane has no closed boundary curve")

    def __repr__(self):
        return "HalfPlane()"


def _disk_greens(R, z, w):
    return -(math.log(R * abs(z - w)) -
             math.log(abs(R * R - z * np.conj(w)))) / TWO_PI


def _disk_grad_greens(R, z, w):
    d = z - w
    return -(d / abs(d) ** 2 +
             w / np.conj(R * R - z * np.conj(w))) / TWO_PI


def _disk_robin(R, z):
    return math.log((R * R - abs(z) ** 2) / R) / TWO_PI


def _disk_grad_robin(R, z):
    return -2.0 * z / (TWO_PI * (R * R - abs(z) ** 2))


class DiskDomain:
    """Disk of radius R centered at the origin."""

    name = "disk"

    def __init__(self, radius=1.0):
        if radius <= 0:
            raise InvalidParameter("radius must be positive")
        self.radius = float(radius)
        self.scale = self.radius

    def inside(self, z):
        return abs(z) < self.radius

    def boundary_distance(self, z):
        return self.radius - abs(z)

    def greens(self, z, w):
        return _disk_greens(self.radius, z, w)

    def grad_greens(self, z, w):
        return _disk_grad_greens(self.radius, z, w)

    def robin(self, z):
        return _disk_robin(self.radius, z)

    def grad_robin(self, z):
        return _disk_grad_robin(self.radius, z)

    def curve(self):
        return geo.disk(self.radius)

    def __repr__(self):
        return "DiskDomain(%g)" % self.radius


class NeumannOvalDomain:
    """Image of the unit disk under F(Z) = a Z / (1 - lam^2 Z^2).

    The Green's function pulls back conformally; the Robin function
    picks up the log-derivative of the inverse map.
    """

    name = "neumann_oval"

    def __init__(self, lam):
        if not 0 <= lam < 1:
            raise InvalidParameter("lam must lie in [0, 1)")
        self.lam = float(lam)
        self.a = (1.0 - lam ** 4) / math.sqrt(1.0 + lam ** 4)
        self._l2 = self.lam * self.lam
        t = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
        self._nodes = self._fwd(np.exp(1j * t))
        self.scale = float(np.abs(self._nodes).max())

    def _fwd(self, Z):
        return self.a * Z / (1.0 - self._l2 * Z * Z)

    def _fwd_d1(self, Z):
        return self.a * (1.0 + self._l2 * Z * Z) / (
            1.0 - self._l2 * Z * Z) ** 2

    def _fwd_d2(self, Z):
        return 2.0 * self.a * self._l2 * Z * (3.0 + self._l2 * Z * Z) / (
            1.0 - self._l2 * Z * Z) ** 3

    def inv(self, z):
        """Inverse map onto the unit disk, branch fixed by f(z) ~ z/a."""
        if self._l2 == 0.0:
            return z / self.a
        if abs(z) < 1e-12 * self.a:
            return z / self.a
        root = np.sqrt(self.a * self.a + 4.0 * self._l2 * z * z)
        return (-self.a + root) / (2.0 * self._l2 * z)

    def inv_d1(self, z):
        return 1.0 / self._fwd_d1(self.inv(z))

    def inv_d2(self, z):
        Z = self.inv(z)
        return -self._fwd_d2(Z) / self._fwd_d1(Z) ** 3

    def inside(self, z):
        return abs(self.inv(z)) < 1.0

    def boundary_distance(self, z):
        return float(np.min(np.abs(self._nodes - z)))

    def greens(self, z, w):
        return _disk_greens(1.0, self.inv(z), self.inv(w))

    def grad_greens(self, z, w):
        return np.conj(self.inv_d1(z)) * _disk_grad_greens(
            1.0, self.inv(z), self.inv(w))

    def robin(self, z):
        fp = self.inv_d1(z)
        return _disk_robin(1.0, self.inv(z)) - math.log(abs(fp)) / TWO_PI

    def grad_robin(self, z):
        fp = self.inv_d1(z)
        return (np.conj(fp) * _disk_grad_robin(1.0, self.inv(z)) -
                np.conj(self.inv_d2(z) / fp) / TWO_PI)

    def curve(self):
        return geo.neumann_oval(self.lam)

    def __repr__(self):
        return "NeumannOvalDomain(%g)" % self.lam


def _check_interior(domain, z, label="point"):
    if not domain.inside(z):
        raise BoundarySingularity("%s not strictly inside %r" % (label,
                                                                 domain))
    if domain.boundary_distance(z) < 1e-12 * domain.scale:
        raise BoundarySingularity("%s on the boundary of %r" % (label,
                                                                domain))


def _check_pair(domain, z, w):
    _check_interior(domain, z, "z")
    _check_interior(domain, w, "w")
    if abs(z - w) < 1e-14 * domain.scale:
        raise DiagonalSingularity("z and w coincide")


def greens(domain, z, w):
    """Positive-type Dirichlet Green's function of the domain."""
    z, w = _as_z(z), _as_z(w)
    _check_pair(domain, z, w)
    return domain.greens(z, w)


def grad_greens(domain, z, w):
    """Real gradient in z of greens, packed as a complex number."""
    z, w = _as_z(z), _as_z(w)
    _check_pair(domain, z, w)
    return domain.grad_greens(z, w)


def robin(domain, z):
    """Robin function R(z) = lim_{w->z} [G(z,w) + log|z-w| / 2 pi]."""
    z = _as_z(z)
    _check_interior(domain, z)
    return domain.robin(z)


def grad_robin(domain, z):
    z = _as_z(z)
    _check_interior(domain, z)
    return domain.grad_robin(z)


# -- configurations and the Kirchhoff system ------------------------------


@dataclass
class VortexConfiguration:
    """Positions, circulations, and the domain carrying them."""

    z: np.ndarray
    gamma: np.ndarray
    domain: object
    t: float = 0.0

    def __post_init__(self):
        self.z = np.atleast_1d(np.asarray(self.z, dtype=complex))
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))
        if self.z.shape != self.gamma.shape:
            raise InvalidParameter("positions and circulations mismatch")
        for k, zk in enumerate(self.z):
            _check_interior(self.domain, complex(zk), "vortex %d" % k)
        n = len(self.z)
        for i in range(n):
            for j in range(i + 1, n):
                if abs(self.z[i] - self.z[j]) < 1e-14 * self.domain.scale:
                    raise DiagonalSingularity(
                        "vortices %d and %d coincide" % (i, j))

    @property
    def n(self):
        return len(self.z)


def _velocities(domain, z, gamma):
    n = len(z)
    out = np.zeros(n, dtype=complex)
    for i in range(n):
        g = 0.5 * gamma[i] * domain.grad_robin(complex(z[i]))
        for j in range(n):
            if j != i:
                g += gamma[j] * domain.grad_greens(complex(z[i]),
                                                   complex(z[j]))
        out[i] = -1j * g
    return out


def vortex_rhs(config):
    """Velocities dz_i/dt of the regularized vortex system."""
    return _velocities(config.domain, config.z, config.gamma)


def hamiltonian(config_or_domain, z=None, gamma=None):
    """Interaction energy plus the self (Robin) terms."""
    if z is None:
        domain, z, gamma = (config_or_domain.domain, config_or_domain.z,
                            config_or_domain.gamma)
    else:
        domain = config_or_domain
    n = len(z)
    H = 0.0
    for i in range(n):
        H += 0.5 * gamma[i] ** 2 * domain.robin(complex(z[i]))
        for j in range(i + 1, n):
            H += gamma[i] * gamma[j] * domain.greens(complex(z[i]),
                                                     complex(z[j]))
    return H


def momentum(config):
    """Horizontal translation momentum sum Gamma_i y_i (half-plane)."""
    return float(np.sum(config.gamma * np.imag(config.z)))


@dataclass
class VortexTrajectory:
    """Sampled integration output with conserved-quantity logs."""

    t: np.ndarray
    z: np.ndarray
    gamma: np.ndarray
    domain: object
    hamiltonian: np.ndarray
    momentum: np.ndarray
    drift: float

    @property
    def final(self):
        return VortexConfiguration(self.z[-1].copy(), self.gamma.copy(),
                                   self.domain, t=float(self.t[-1]))


GUARD_DISTANCE = 1e-8


def integrate(config, T, tol=1e-8, rtol=1e-11, n_eval=600, events=None):
    """Integrate the vortex system to time T with drift control.

    The Hamiltonian is evaluated along the output; if its relative
    drift exceeds tol the run is repeated at tighter tolerance. Close
    approaches to the boundary or between vortices stop the run with
    EventStop carrying the partial trajectory.
    """
    if tol <= 0 or T <= 0:
        raise InvalidParameter("need positive horizon and tolerance")
    domain = config.domain
    gamma = config.gamma.copy()
    n = config.n
    y0 = np.empty(2 * n)
    y0[0::2] = np.real(config.z)
    y0[1::2] = np.imag(config.z)

    def rhs(t, y):
        z = y[0::2] + 1j * y[1::2]
        v = _velocities(domain, z, gamma)
        out = np.empty_like(y)
        out[0::2] = np.real(v)
        out[1::2] = np.imag(v)
        return out

    def ev_boundary(t, y):
        z = y[0::2] + 1j * y[1::2]
        return min(domain.boundary_distance(complex(zk))
                   for zk in z) - GUARD_DISTANCE

    def ev_collide(t, y):
        z = y[0::2] + 1j * y[1::2]
        best = math.inf
        for i in range(n):
            for j in range(i + 1, n):
                best = min(best, abs(z[i] - z[j]))
        return best - GUARD_DISTANCE

    ev_boundary.terminal = True
    ev_collide.terminal = True
    ev_list = [ev_boundary, ev_collide] + list(events or [])

    H0 = hamiltonian(config)
    t_eval = np.linspace(0.0, T, n_eval)
    rt = rtol
    for attempt in range(3):
        sol = solve_ivp(rhs, (0.0, T), y0, method="RK45", rtol=rt,
                        atol=rt * 1e-2, t_eval=t_eval, events=ev_list,
                        dense_output=False)
        if not sol.success and sol.status != 1:
            raise InvalidParameter("integration failed: %s" % sol.message)
        tt = sol.t
        zz = (sol.y[0::2] + 1j * sol.y[1::2]).T
        if sol.status == 1:
            t_ev = min(float(te[0]) for te in sol.t_events if len(te))
            y_ev = None
            for te, ye in zip(sol.t_events, sol.y_events):
                if len(te) and float(te[0]) == t_ev:
                    y_ev = ye[0]
            z_ev = y_ev[0::2] + 1j * y_ev[1::2]
            tt = np.append(tt, t_ev)
            zz = np.vstack([zz, z_ev[None, :]])
        Hs = np.array([hamiltonian(domain, zk, gamma) for zk in zz])
        mom = np.array([float(np.sum(gamma * np.imag(zk))) for zk in zz])
        drift = float(np.max(np.abs(Hs - H0)) / max(abs(H0), 1e-300))
        if drift <= tol:
            break
        rt = max(rt * 1e-2, 1e-13)
    else:
        raise InvalidParameter("Hamiltonian drift %.3g exceeds tol" % drift)
    traj = VortexTrajectory(t=tt, z=zz, gamma=gamma, domain=domain,
                            hamiltonian=Hs, momentum=mom, drift=drift)
    if sol.status == 1 and len(sol.t_events[0]) + len(sol.t_events[1]) > 0:
        err = EventStop("vortex came within guard distance",
                        t=float(tt[-1]), state=zz[-1])
        err.trajectory = traj
        raise err
    return traj


# -- dipole bookkeeping ----------------------------------------------------


@dataclass(frozen=True)
class DipoleCoordinates:
    """Relative/absolute coordinates of a two-vortex state."""

    x_rel: float
    y_rel: float
    x_abs: float
    y_abs: float
    mu: float
    eps: float
    gamma: float
    theta: float

    @classmethod
    def from_positions(cls, z_plus, z_minus, gamma):
        zp, zm = _as_z(z_plus), _as_z(z_minus)
        d = zp - zm
        direction = -1j * d / abs(d)
        theta = math.acos(max(-1.0, min(1.0, direction.real)))
        return cls(x_rel=d.real, y_rel=d.imag,
                   x_abs=0.5 * (zp.real + zm.real),
                   y_abs=0.5 * (zp.imag + zm.imag),
                   mu=d.imag, eps=0.5 * abs(d), gamma=float(gamma),
                   theta=theta)


def make_dipole(center, direction, eps, gamma=None, domain=None):
    """Vortex pair traveling along `direction` at speed gamma/(4 pi eps).

    The positive vortex sits to the left of the motion. With gamma
    omitted, it is set to 4 pi eps so the pair moves at unit speed.
    """
    zc = _as_z(center)
    d = _as_z(direction)
    d /= abs(d)
    if gamma is None:
        gamma = 4.0 * math.pi * eps
    z = np.array([zc + 1j * eps * d, zc - 1j * eps * d])
    g = np.array([gamma, -gamma])
    if domain is not None:
        return VortexConfiguration(z, g, domain)
    return z, g


# -- fission / fusion algebra ---------------------------------------------


@dataclass(frozen=True)
class FissionOutcome:
    """Speeds and heights (per unit separation) after a wall split."""

    v_plus: float
    v_minus: float
    y_plus: float
    y_minus: float


def fission_outcome(v, theta):
    """Monopole speeds and heights for a dipole hitting at angle theta."""
    if not 0.0 < theta < math.pi:
        raise InvalidAngle("incidence angle must lie in (0, pi)")
    c = math.cos(theta)
    m = math.sqrt(1.0 + c * c)
    return FissionOutcome(v_plus=v * (m - c), v_minus=v * (m + c),
                          y_plus=m - c, y_minus=m + c)


@dataclass(frozen=True)
class Merge:
    """Fusion verdict: the monopoles re-enter as a dipole."""

    theta: float
    speed: float
    x_meet: float


@dataclass(frozen=True)
class Pass:
    """Fusion verdict: height ratio outside the silver window."""

    ratio: float


def fusion_outcome(y_plus, y_minus, gamma, x_plus=0.0, x_minus=0.0):
    """Merge-or-pass decision for two boundary monopoles.

    The merge angle is measured from the boundary normal; the window is
    the open silver interval chi^-2 < y_plus/y_minus < chi^2.
    """
    if y_plus <= 0 or y_minus <= 0:
        raise InvalidParameter("heights must be positive")
    ratio = y_plus / y_minus
    if not CHI ** -2 < ratio < CHI ** 2:
        return Pass(ratio=ratio)
    num = (y_plus - y_minus) ** 2
    den = -y_plus ** 2 + 6.0 * y_plus * y_minus - y_minus ** 2
    theta = math.atan(math.sqrt(num / den))
    speed = gamma / (4.0 * math.pi * math.sqrt(y_plus * y_minus))
    x_meet = (x_plus * y_plus + x_minus * y_minus) / (y_plus + y_minus)
    return Merge(theta=theta, speed=speed, x_meet=x_meet)


def vortex_delay_from_fission(theta, L):
    """Re-meeting displacement 2L v+ / (v+ + v-) of the split monopoles."""
    if not 0.0 < theta < math.pi:
        raise InvalidAngle("incidence angle must lie in (0, pi)")
    c = math.cos(theta)
    m = math.sqrt(1.0 + c * c)
    return L * (m - c) / m


def pair_classification(mu, same_sign):
    """Regime label for a two-vortex pair at normalized momentum mu."""
    mu = abs(float(mu))
    if not same_sign:
        return "MergeDipole" if mu < CHI else "Pass"
    if abs(mu - PHI) < 1e-12:
        return "Cusp"
    if mu < PHI:
        return "LeapfrogReversing"
    if mu < CHI:
        return "LeapfrogNoReverse"
    return "PassOnce"


# -- the zero-separation limit against the ODE -----------------------------


def _ray_to_boundary(curve, z, direction):
    """First boundary hit of the ray z + u * direction, u > 0."""
    t = np.linspace(0.0, TWO_PI, 4096, endpoint=False)
    nodes = curve.zpoint_t(t)
    cd = np.conj(direction)
    f = np.imag(cd * (nodes - z))
    fn = np.roll(f, -1)
    cross = (f <= 0.0) != (fn <= 0.0)
    if not np.any(cross):
        raise InvalidPoint("ray misses the boundary")
    best_u, best_t = math.inf, None
    idx = np.nonzero(cross)[0]
    dt = t[1] - t[0]
    for k in idx:
        w = f[k] / (f[k] - fn[k])
        hit = nodes[k] * (1 - w) + nodes[(k + 1) % len(t)] * w
        u = np.real(cd * (hit - z))
        if 1e-12 < u < best_u:
            best_u, best_t = u, t[k] + w * dt
    if best_t is None:
        raise InvalidPoint("ray does not leave the domain")

    def g(tv):
        return np.imag(cd * (curve.zpoint_t(tv) - z))

    lo, hi = best_t - dt, best_t + dt
    if g(lo) * g(hi) < 0:
        tstar = brentq(g, lo, hi, xtol=1e-15)
    else:
        tstar = best_t
    s = float(curve.arclen_t(tstar % TWO_PI)) % curve.perimeter
    return s, complex(curve.zpoint_t(tstar))


@dataclass(frozen=True)
class LimitCheckReport:
    """One ODE bounce compared against one step of the limit map."""

    eps: float
    s_model: float
    theta_model: float
    s_ode: float
    theta_ode: float
    delta_s: float
    delta_theta: float


def dipole_billiard_limit_check(domain, x0, theta0, eps, detect_radius=None):
    """Integrate a tight dipole through one bounce and compare with the
    vortex-billiard step at the same launch data."""
    curve = domain.curve()
    law = delay_mod.vortex_for(curve)
    P = curve.perimeter
    s0 = float(x0) % P
    from . import billiard as bil
    model = bil.pensive_step(curve, law, bil.PhasePoint(s0, theta0))

    s_land, _, chord_len = geo.chord(curve, s0, theta0)
    za = complex(*curve.point(s0))
    zb = complex(*curve.point(s_land))
    zmid = 0.5 * (za + zb)
    d_hat = (zb - za) / abs(zb - za)
    depth = domain.boundary_distance(zmid)
    if detect_radius is None:
        detect_radius = 0.6 * depth
    if detect_radius < 8 * eps:
        raise ReportIncomplete("separation too coarse for this chord")
    z, g = make_dipole(zmid, d_hat, eps)
    config = VortexConfiguration(z, g, domain)

    # fire only when the pair is dipole-like again: during the wall
    # slide the monopoles separate by an O(1) arc and their centroid
    # crosses the ring spuriously
    def ev_out(t, y):
        if abs(complex(y[0] - y[2], y[1] - y[3])) > 4.0 * eps:
            return -1.0
        zc = complex(0.5 * (y[0] + y[2]), 0.5 * (y[1] + y[3]))
        return domain.boundary_distance(zc) - detect_radius

    ev_out.terminal = True
    ev_out.direction = 1.0

    horizon = (0.5 * chord_len + abs(law.ell(-1.0)) + 6 * P) / 0.4
    try:
        traj = integrate(config, horizon, tol=1e-6, rtol=1e-10,
                         n_eval=400, events=[ev_out])
    except EventStop as stop:
        raise ReportIncomplete("guard event before re-merge at t=%.3g"
                               % stop.t)
    if traj.t[-1] >= horizon:
        raise ReportIncomplete("bounce did not complete in the horizon")
    zf = traj.z[-1]
    vel = _velocities(domain, zf, traj.gamma)
    v_c = 0.5 * (vel[0] + vel[1])
    d_out = v_c / abs(v_c)
    zc = 0.5 * (zf[0] + zf[1])
    s_ode, z_hit = _ray_to_boundary(curve, zc, -d_out)
    tau = complex(curve.tangent_t(float(curve.t_of_s(s_ode))))
    theta_ode = math.acos(max(-1.0, min(1.0,
                                        (np.conj(tau) * d_out).real)))
    ds = abs(geo.wrap_to_half(s_ode - model.s, P))
    dth = abs(theta_ode - model.theta)
    return LimitCheckReport(eps=eps, s_model=model.s,
                            theta_model=model.theta, s_ode=s_ode,
                            theta_ode=theta_ode, delta_s=ds,
                            delta_theta=dth)


# -- event-driven multi-dipole model ---------------------------------------


@dataclass(frozen=True)
class MDEvent:
    """One entry of the fission/fusion/pass log."""

    t: float
    kind: str
    s: float
    theta: float
    speeds: tuple
    origins: tuple


@dataclass(frozen=True)
class FlightSeg:
    t0: float
    t1: float
    s_from: float
    s_to: float
    theta: float
    speed: float
    dipole: int


@dataclass(frozen=True)
class ArcSeg:
    t0: float
    t1: float
    s0: float
    u: float
    sign: int
    dipole: int


@dataclass
class _Flight:
    dipole: int
    s_from: float
    theta: float
    speed: float
    t0: float
    t1: float
    s_to: float
    p_land: float


@dataclass
class _Mono:
    dipole: int
    sign: int
    s_ref: float
    t_ref: float
    u: float

    def pos(self, t, P):
        return (self.s_ref + self.u * (t - self.t_ref)) % P


@dataclass
class MultiDipoleResult:
    """Event log plus piecewise trajectory segments of the limit model."""

    events: list
    segments: list
    T: float
    curve: object
    flights_left: int = 0
    monopoles_left: int = 0


def _launch(curve, dipole_id, s, theta, speed, t0):
    s2, th2, length = geo.chord(curve, s % curve.perimeter, theta)
    return _Flight(dipole=dipole_id, s_from=s % curve.perimeter,
                   theta=theta, speed=speed, t0=t0,
                   t1=t0 + length / speed, s_to=s2,
                   p_land=math.cos(th2))


def _next_meeting(m1, m2, t_now, P):
    du = m1.u - m2.u
    if abs(du) < 1e-15:
        return None
    c = ((m1.s_ref + m1.u * (t_now - m1.t_ref)) -
         (m2.s_ref + m2.u * (t_now - m2.t_ref)))
    k0 = math.floor(c / P)
    best = None
    for k in (k0 - 1, k0, k0 + 1, k0 + 2):
        tau = (k * P - c) / du
        if tau > 1e-12 and (best is None or tau < best):
            best = tau
    return None if best is None else t_now + best


def multi_dipole_simulate(dipoles, domain_or_curve, T):
    """Run the zero-separation limit model: chords inside, monopole
    pairs along the boundary, silver-window fusions at meetings."""
    curve = (domain_or_curve if hasattr(domain_or_curve, "perimeter")
             else domain_or_curve.curve())
    P = curve.perimeter
    flights = []
    monos = []
    events = []
    segments = []
    next_id = 0
    for entry in dipoles:
        s, theta = float(entry[0]), float(entry[1])
        speed = float(entry[2]) if len(entry) > 2 else 1.0
        flights.append(_launch(curve, next_id, s, theta, speed, 0.0))
        next_id += 1

    t_now = 0.0
    while True:
        t_fl = min((f.t1 for f in flights), default=math.inf)
        meets = []
        for i in range(len(monos)):
            for j in range(i + 1, len(monos)):
                tm = _next_meeting(monos[i], monos[j], t_now, P)
                if tm is not None:
                    meets.append((tm, monos[i], monos[j]))
        t_meet = min((m[0] for m in meets), default=math.inf)
        t_next = min(t_fl, t_meet)
        if t_next > T:
            break
        if t_fl <= t_meet:
            f = min(flights, key=lambda fl: fl.t1)
            flights.remove(f)
            t_now = f.t1
            segments.append(FlightSeg(f.t0, f.t1, f.s_from, f.s_to,
                                      f.theta, f.speed, f.dipole))
            c = f.p_land
            m = math.sqrt(1.0 + c * c)
            up = f.speed * (m - c)
            um = f.speed * (m + c)
            monos.append(_Mono(f.dipole, +1, f.s_to, t_now, +up))
            monos.append(_Mono(f.dipole, -1, f.s_to, t_now, -um))
            events.append(MDEvent(t_now, "fission", f.s_to,
                                  math.acos(max(-1.0, min(1.0, c))),
                                  (up, um), (f.dipole,)))
            continue

        # process every meeting in the same instant; disjoint pairs are
        # independent, shared monopoles are co-located and caught by
        # the ambiguity scan
        t_now = t_meet
        batch = [m for m in meets if m[0] - t_meet <= 1e-12]
        for _, mi, mj in batch:
            if mi not in monos or mj not in monos:
                continue
            s_meet = mi.pos(t_now, P)
            for other in monos:
                if other is mi or other is mj:
                    continue
                gap = abs(geo.wrap_to_half(other.pos(t_now, P) - s_meet,
                                           P))
                if gap < 1e-9:
                    err = AmbiguousEvent(
                        "three monopoles within 1e-9 arc at t=%.6g"
                        % t_now)
                    err.t = t_now
                    err.log = events
                    raise err
            if mi.sign == mj.sign:
                events.append(MDEvent(t_now, "pass", s_meet, math.nan,
                                      (abs(mi.u), abs(mj.u)),
                                      (mi.dipole, mj.dipole)))
                continue
            plus, minus = (mi, mj) if mi.sign > 0 else (mj, mi)
            u_p, u_m = abs(plus.u), abs(minus.u)
            ratio = u_m / u_p  # height(+)/height(-)
            if not CHI ** -2 < ratio < CHI ** 2:
                events.append(MDEvent(t_now, "pass", s_meet, math.nan,
                                      (u_p, u_m),
                                      (plus.dipole, minus.dipole)))
                continue
            p_new = 0.5 * (math.sqrt(ratio) - 1.0 / math.sqrt(ratio))
            theta_new = math.acos(max(-1.0, min(1.0, p_new)))
            speed_new = math.sqrt(u_p * u_m)
            for m in (plus, minus):
                segments.append(ArcSeg(m.t_ref, t_now, m.s_ref, m.u,
                                       m.sign, m.dipole))
            monos = [m for m in monos if m is not mi and m is not mj]
            events.append(MDEvent(t_now, "fusion", s_meet, theta_new,
                                  (u_p, u_m),
                                  (plus.dipole, minus.dipole)))
            flights.append(_launch(curve, next_id, s_meet, theta_new,
                                   speed_new, t_now))
            next_id += 1

    for f in flights:
        # chord endpoint kept; t1 = T marks the flight as truncated
        segments.append(FlightSeg(f.t0, T, f.s_from, f.s_to, f.theta,
                                  f.speed, f.dipole))
    for m in monos:
        segments.append(ArcSeg(m.t_ref, T, m.s_ref, m.u, m.sign, m.dipole))
    return MultiDipoleResult(events=events, segments=segments, T=T,
                             curve=curve, flights_left=len(flights),
                             monopoles_left=len(monos))
