"""Classical and slid (pensive) billiard maps.

One step: shoot the chord from (s, theta), reflect at the impact point,
then slide the bounce point by l~(Theta) of arc length before the next
chord. With the zero slide law this is the classical billiard. On
polygons the slide may carry the point across vertices; the outgoing
angle keeps its value and is re-measured against the landing edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import delay as delay_mod
from . import geometry as geo
from .errors import (CornerHit, InvalidParameter, PensiveError, Unsupported)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhasePoint:
    s: float
    theta: float
    p: float = field(init=False)

    def __post_init__(self):
        geo._check_angle(self.theta)
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "p", math.cos(self.theta))


@dataclass
class StepRecord:
    s_launch: float
    theta_in: float
    s_impact: float
    theta_out: float
    s_out: float
    chord_length: float
    slide: float


class Trajectory:
    """Iterated map states plus the impact/reflection points of each chord."""

    def __init__(self, curve, law, x0):
        self.curve = curve
        self.law = law
        self.points = [x0]
        self.impacts = []       # chord landing gamma(S_cl), complex
        self.reflects = []      # post-slide launch gamma(S_cl + slide)
        self.chord_lengths = []

    def append(self, rec):
        self.points.append(PhasePoint(rec.s_out, rec.theta_out))
        self.impacts.append(point_xy(self.curve, rec.s_impact))
        self.reflects.append(point_xy(self.curve, rec.s_out))
        self.chord_lengths.append(rec.chord_length)

    def __len__(self):
        return len(self.points)

    @property
    def n_steps(self):
        return len(self.points) - 1

    def as_arrays(self):
        s = np.array([x.s for x in self.points])
        theta = np.array([x.theta for x in self.points])
        return {
            "s": s,
            "theta": theta,
            "p": np.cos(theta),
            "impact": np.array(self.impacts, dtype=float).reshape(-1, 2),
            "reflect": np.array(self.reflects, dtype=float).reshape(-1, 2),
            "chord_length": np.array(self.chord_lengths),
        }


def point_xy(curve, s):
    """Boundary point as an (x, y) array for smooth or polygon tables."""
    z = curve.point(s)
    if np.iscomplexobj(z):
        return np.array([np.real(z), np.imag(z)], dtype=float)
    return np.asarray(z, dtype=float)


def _pensive_raw(curve, law, s, theta):
    s_cl, theta_out, length = geo.chord(curve, s, theta)
    slide = float(law.ell_theta(theta_out))
    s_out = geo.arc_advance(curve, s_cl, slide)
    if isinstance(curve, geo.PolygonBoundary):
        if curve.nearest_vertex_gap(s_out)[1] < geo.CORNER_TOL:
            raise CornerHit("slide landed on a vertex")
    return StepRecord(s, theta, s_cl, theta_out, s_out, length, slide)


def classical_step(curve, x):
    s2, th2, _ = geo.chord(curve, x.s, x.theta)
    return PhasePoint(s2, th2)


def pensive_step(curve, law, x):
    rec = _pensive_raw(curve, law, x.s, x.theta)
    return PhasePoint(rec.s_out, rec.theta_out)


def pensive_step_record(curve, law, x):
    return _pensive_raw(curve, law, x.s, x.theta)


def iterate(curve, law, x0, n):
    """n slid-billiard steps; a failed step re-raises with .partial set."""
    traj = Trajectory(curve, law, x0)
    for _ in range(n):
        x = traj.points[-1]
        try:
            rec = _pensive_raw(curve, law, x.s, x.theta)
        except PensiveError as e:
            e.partial = traj
            raise
        traj.append(rec)
    return traj


def pensive_batch(curve, law, s, theta):
    """Vectorized step for arrays of phase points on a smooth convex curve."""
    s = np.asarray(s, dtype=float)
    theta = np.asarray(theta, dtype=float)
    s_cl, theta_out, _ = geo.chord_batch(curve, s, theta)
    s_out = np.mod(s_cl + law.ell_theta(theta_out), curve.perimeter)
    return s_out, theta_out


def measure_jacobian_det(curve, law, s, p, h=1e-6):
    """Central-difference Jacobian determinant of the step in (s, p).

    Invariance of sin(theta) dtheta ^ ds means the determinant is 1 in
    these coordinates for convex tables.
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    p = np.atleast_1d(np.asarray(p, dtype=float))
    P = curve.perimeter

    def push(sv, pv):
        S, Th = pensive_batch(curve, law, sv, np.arccos(np.clip(pv, -1, 1)))
        return S, np.cos(Th)

    S_sp, P_sp = push(s + h, p)
    S_sm, P_sm = push(s - h, p)
    S_pp, P_pp = push(s, p + h)
    S_pm, P_pm = push(s, p - h)
    dS_ds = geo.wrap_to_half(S_sp - S_sm, P) / (2 * h)
    dP_ds = (P_sp - P_sm) / (2 * h)
    dS_dp = geo.wrap_to_half(S_pp - S_pm, P) / (2 * h)
    dP_dp = (P_pp - P_pm) / (2 * h)
    return dS_ds * dP_dp - dS_dp * dP_ds


def disk_rotation_angle(law, theta):
    """Boundary rotation per step on the unit disk: 2*theta + l~(theta)."""
    return 2.0 * np.asarray(theta, dtype=float) + law.ell_theta(theta)


def caustic_radius(radius, theta):
    """Distance from the disk center to every chord of a constant-theta orbit."""
    return radius * np.abs(np.cos(np.asarray(theta, dtype=float)))


# -- polygon slices as interval exchanges ---------------------------------


@dataclass
class IETPiece:
    angle_index: int
    lo: float
    hi: float
    image_index: int
    raw_slope: float
    image_at_lo: float
    chart_slope: float
    roof_lo: float
    roof_hi: float

    def map_s(self, s, perimeter):
        return (self.image_at_lo + self.raw_slope * (s - self.lo)) % perimeter


@dataclass
class IETRealization:
    """Slid billiard on a rational polygon, one chart per accessible angle.

    The step restricted to the slice theta = theta_k is piecewise affine
    in arc length with slope -sin(theta)/sin(Theta); in the chart that
    weights each slice by sin(theta_k) (the measure the map preserves)
    every piece has slope of magnitude one, which is the interval
    exchange structure. Roof values are the chord flight lengths.
    """

    polygon: object
    law_tag: str
    theta0: float
    angles: np.ndarray
    label: float
    perimeter: float
    pieces: list          # list of lists, aligned with angles
    chart_offsets: np.ndarray
    reached: np.ndarray   # slices dynamically reachable from theta0

    def angle_index(self, theta, tol=1e-8):
        k = int(np.argmin(np.abs(self.angles - theta)))
        if abs(self.angles[k] - theta) > tol:
            raise InvalidParameter("angle %r is not in the accessible set"
                                   % theta)
        return k

    def chart(self, s, k):
        return self.chart_offsets[k] + math.sin(self.angles[k]) * (s % self.perimeter)

    @property
    def chart_length(self):
        return self.chart_offsets[-1] + math.sin(self.angles[-1]) * self.perimeter

    def piece_of(self, s, k):
        s = s % self.perimeter
        for cand in (s, s + self.perimeter):
            for pc in self.pieces[k]:
                if pc.lo - 1e-12 <= cand <= pc.hi + 1e-12:
                    return pc, cand
        raise InvalidParameter("no piece contains s=%r on slice %d" % (s, k))

    def step(self, s, k):
        pc, s_adj = self.piece_of(s, k)
        return pc.map_s(s_adj, self.perimeter), pc.image_index


def _slice_probe(polygon, law, theta, angles):
    def probe(s):
        rec = _pensive_raw(polygon, law, s % polygon.perimeter, theta)
        k = int(np.argmin(np.abs(angles - rec.theta_out)))
        if abs(angles[k] - rec.theta_out) > 1e-8:
            raise InvalidParameter(
                "step angle %.15g escaped the accessible lattice"
                % rec.theta_out)
        return rec.s_out, k, rec.chord_length
    return probe


def _same_piece(probe, a, b, va, vb, period):
    if va[1] != vb[1]:
        return False
    m = 0.5 * (a + b)
    try:
        vm = probe(m)
    except PensiveError:
        return False
    if vm[1] != va[1]:
        return False
    pred = vb[0] + 0.5 * geo.wrap_to_half(va[0] - vb[0], period)
    return abs(geo.wrap_to_half(vm[0] - pred, period)) < 1e-6 * period


def _bisect_break(probe, a, b, va, vb, period, tol):
    while b - a > tol:
        m = 0.5 * (a + b)
        try:
            vm = probe(m)
        except PensiveError:
            return m
        if _same_piece(probe, a, m, va, vm, period):
            a, va = m, vm
        else:
            b, vb = m, vm
    return 0.5 * (a + b)


def iet_realize(polygon, theta0, law=None, n_scan=4096):
    """Accessible-angle slices of a rational polygon as interval exchanges."""
    if not isinstance(polygon, geo.PolygonBoundary):
        raise Unsupported("interval-exchange slices need a polygon table")
    if polygon.rational_angles is None:
        raise Unsupported("polygon must declare rational angles")
    geo._check_angle(theta0)
    law = law if law is not None else delay_mod.zero()
    N = polygon.angle_lcm
    base = TWO_PI / N
    P = polygon.perimeter

    # A chord maps theta to (edge-angle difference) - theta, a reflection,
    # so both cosets of the step lattice can occur: <= 2N angles in all.
    lattice = []
    for k in range(N):
        for t in ((theta0 + k * base) % TWO_PI, (-theta0 + k * base) % TWO_PI):
            if geo.ANGLE_TOL < t < math.pi - geo.ANGLE_TOL:
                lattice.append(t)
    lattice.sort()
    merged = [lattice[0]]
    for t in lattice[1:]:
        if t - merged[-1] > 1e-10:
            merged.append(t)
    angles = np.array(merged)

    pieces_by_slice = {}
    start = int(np.argmin(np.abs(angles - theta0)))
    vertex_s = np.sort(np.mod(polygon.cum_s, P))

    for k in range(len(angles)):
        theta = float(angles[k])
        probe = _slice_probe(polygon, law, theta, angles)
        grid = (np.arange(n_scan) + 0.5) * (P / n_scan)
        vals = []
        for s in grid:
            v = None
            for nudge in (0.0, 1e-4, -1e-4):
                try:
                    v = probe(s + nudge * P / n_scan)
                    break
                except PensiveError:
                    continue
            if v is None:
                raise InvalidParameter("could not probe slice near s=%g" % s)
            vals.append(v)

        brk = set(float(v) for v in vertex_s)
        for i in range(n_scan):
            a, b = grid[i], grid[(i + 1) % n_scan]
            if i + 1 == n_scan:
                b = grid[0] + P
            va, vb = vals[i], vals[(i + 1) % n_scan]
            lo_v = np.searchsorted(vertex_s, a + 1e-12)
            hi_v = np.searchsorted(vertex_s, b - 1e-12)
            if lo_v != hi_v:
                continue  # a vertex already separates them
            if not _same_piece(probe, a, b, va, vb, P):
                brk.add(_bisect_break(probe, a, b, va, vb, P, 1e-11 * P) % P)

        cuts = np.sort(np.array(sorted(brk)))
        slice_pieces = []
        for j in range(len(cuts)):
            lo = cuts[j]
            hi = cuts[(j + 1) % len(cuts)] if j + 1 < len(cuts) else cuts[0] + P
            if hi - lo < 1e-9 * P:
                continue
            eps = min(1e-7 * P, 0.2 * (hi - lo))
            a, c = lo + eps, hi - eps
            va, vc = probe(a), probe(c)
            if va[1] != vc[1]:
                raise InvalidParameter("piece (%g, %g) is not coherent" % (lo, hi))
            slope = geo.wrap_to_half(vc[0] - va[0], P) / (c - a)
            vm = probe(0.5 * (a + c))
            resid = geo.wrap_to_half(vm[0] - va[0], P) - slope * (0.5 * (a + c) - a)
            if abs(resid) > 1e-6 * P:
                raise InvalidParameter("piece (%g, %g) is not affine" % (lo, hi))
            th_img = float(angles[va[1]])
            chart_slope = slope * math.sin(th_img) / math.sin(theta)
            roof_lo = va[2] - (va[2] - vc[2]) / (c - a) * (a - lo)
            roof_hi = vc[2] + (vc[2] - va[2]) / (c - a) * (hi - c)
            slice_pieces.append(IETPiece(
                angle_index=k, lo=float(lo % P), hi=float(lo % P + (hi - lo)),
                image_index=va[1], raw_slope=float(slope),
                image_at_lo=float((va[0] - slope * (a - lo)) % P),
                chart_slope=float(chart_slope),
                roof_lo=float(roof_lo), roof_hi=float(roof_hi)))
        total = sum(pc.hi - pc.lo for pc in slice_pieces)
        if abs(total - P) > 1e-6 * P:
            raise InvalidParameter("slice %d pieces cover %g of %g" % (k, total, P))
        pieces_by_slice[k] = slice_pieces

    pieces = [pieces_by_slice[k] for k in range(len(angles))]
    reached = np.zeros(len(angles), dtype=bool)
    stack = [start]
    while stack:
        k = stack.pop()
        if reached[k]:
            continue
        reached[k] = True
        for pc in pieces[k]:
            if not reached[pc.image_index]:
                stack.append(pc.image_index)
    sines = np.sin(angles)
    offsets = np.concatenate([[0.0], np.cumsum(sines * P)[:-1]])
    r = theta0 % base
    label = min(r, base - r)
    return IETRealization(
        polygon=polygon, law_tag=law.tag, theta0=float(theta0),
        angles=angles, label=float(label), perimeter=P,
        pieces=pieces, chart_offsets=offsets, reached=reached)
