"""Outer billiard tests: tangent coordinates, the pensive step, area
preservation, and the spherical swept-area duality."""

import math

import numpy as np
import pytest
from scipy.integrate import dblquad, quad
from scipy.optimize import minimize_scalar

from pensive import delay, geometry as geo, outer
from pensive.errors import (InvalidParameter, NotExterior, Unsupported)

RNG = np.random.default_rng(20240823)
TWO_PI = 2.0 * math.pi


def square_oval(nodes=256):
    """Square-like smooth oval: rounded 4-norm ball, strictly convex."""
    phi = np.linspace(0, TWO_PI, nodes, endpoint=False)
    r = (0.75 + 0.22 * np.cos(4 * phi)) ** (-0.25)
    return geo.curve_from_points(np.c_[r * np.cos(phi), r * np.sin(phi)])


def wobble_curve():
    """Convex spherical curve with varying geodesic curvature."""

    def fun(u):
        psi = 0.8 + 0.1 * math.sin(2 * u)
        return np.array([math.sin(psi) * math.cos(u),
                         math.sin(psi) * math.sin(u),
                         math.cos(psi)])

    return outer.SphericalCurve(fun)


class TestTangentCoordinates:
    def test_circle_example(self):
        c = geo.disk(1.0)
        op = outer.tangent_coordinates(c, (2.0, 0.0))
        assert op.r == pytest.approx(math.sqrt(3.0), abs=1e-12)
        p = c.zpoint_t(op.t)
        assert p.real == pytest.approx(0.5, abs=1e-12)
        assert p.imag == pytest.approx(-math.sqrt(3.0) / 2, abs=1e-12)

    def test_circle_tangent_lengths(self):
        c = geo.disk(1.0)
        for d in (1.2, 2.0, 3.7, 10.0):
            op = outer.tangent_coordinates(c, (d, 0.0))
            assert op.r == pytest.approx(math.sqrt(d * d - 1), abs=1e-10)

    def test_reconstruction(self):
        ell = geo.ellipse(2.0, 1.0)
        for _ in range(20):
            ang = RNG.uniform(0, TWO_PI)
            rad = RNG.uniform(2.4, 5.0)
            X = np.array([rad * math.cos(ang), rad * math.sin(ang)])
            for side, sgn in (("right", 1.0), ("left", -1.0)):
                op = outer.tangent_coordinates(ell, X, side=side)
                assert op.r > 0
                tau = np.array([math.cos(op.alpha), math.sin(op.alpha)])
                rebuilt = ell.point(ell.arclen_t(op.t)) + sgn * op.r * tau
                assert np.linalg.norm(rebuilt - X) < 1e-10

    def test_ellipse_support_oracle(self):
        # the right tangency maximizes the signed bearing seen from X
        ell = geo.ellipse(2.0, 1.0)
        X = np.array([3.0, 1.0])
        op = outer.tangent_coordinates(ell, X)

        def neg_bearing(t):
            g = ell.zpoint_t(t)
            rel = complex(g.real - X[0], g.imag - X[1])
            toward = complex(-X[0], -X[1])
            return -math.atan2((toward.real * rel.imag
                                - toward.imag * rel.real),
                               (toward.real * rel.real
                                + toward.imag * rel.imag))

        ts = np.linspace(0, TWO_PI, 2048, endpoint=False)
        seed = ts[int(np.argmin([neg_bearing(t) for t in ts]))]
        res = minimize_scalar(neg_bearing, bounds=(seed - 0.01, seed + 0.01),
                              method="bounded",
                              options={"xatol": 1e-12})
        p_oracle = ell.zpoint_t(res.x)
        p_found = ell.zpoint_t(op.t)
        assert abs(p_oracle - p_found) < 1e-8

    def test_not_exterior(self):
        c = geo.disk(1.0)
        with pytest.raises(NotExterior):
            outer.tangent_coordinates(c, (0.3, 0.2))
        with pytest.raises(NotExterior):
            outer.tangent_coordinates(c, (1.0, 0.0))

    def test_polygon_unsupported(self):
        with pytest.raises(Unsupported):
            outer.tangent_coordinates(geo.regular_polygon(4), (3.0, 0.0))


class TestOuterStep:
    def test_circle_reflection(self):
        c = geo.disk(1.0)
        X = np.array([2.0, 0.0])
        Y = outer.outer_step(c, X)
        op = outer.tangent_coordinates(c, X)
        p = np.array([c.zpoint_t(op.t).real, c.zpoint_t(op.t).imag])
        assert np.linalg.norm(Y - (2 * p - X)) < 1e-12
        assert np.linalg.norm(Y - p) == pytest.approx(np.linalg.norm(X - p),
                                                      abs=1e-12)

    def test_left_round_trip(self):
        ell = geo.ellipse(2.0, 1.0)
        for _ in range(10):
            ang = RNG.uniform(0, TWO_PI)
            rad = RNG.uniform(2.4, 4.0)
            X = np.array([rad * math.cos(ang), rad * math.sin(ang)])
            Y = outer.outer_step(ell, X)
            back = outer.outer_step(ell, Y, side="left")
            assert np.linalg.norm(back - X) < 1e-9

    def test_coordinate_transport(self):
        # the image carries the source coordinates in the left chart
        ell = geo.ellipse(2.0, 1.0)
        X = np.array([2.8, -1.4])
        op = outer.tangent_coordinates(ell, X)
        Y = outer.outer_step(ell, X)
        opl = outer.tangent_coordinates(ell, Y, side="left")
        assert opl.r == pytest.approx(op.r, abs=1e-10)
        assert opl.alpha == pytest.approx(op.alpha, abs=1e-10)

    def test_far_field(self):
        crv = square_oval()
        X = np.array([500.0, 137.0])
        Y = outer.outer_step(crv, X)
        assert abs(np.linalg.norm(Y) / np.linalg.norm(X) - 1.0) < 0.01


class TestOuterDelay:
    def test_angle_area_consistency(self):
        od = outer.OuterDelay.from_area(lambda r: r ** 3)
        for r in (0.5, 1.0, 2.7):
            assert od.shift(r) == pytest.approx(2.0 * r, abs=1e-12)
            assert od.area(r) == pytest.approx(r ** 3, abs=1e-12)
        od2 = outer.OuterDelay.from_angle(lambda r: 0.4)
        assert od2.area(2.0) == pytest.approx(0.8, abs=1e-12)

    def test_zero(self):
        od = outer.OuterDelay.zero()
        assert od.shift(1.7) == 0.0
        assert od.area(1.7) == 0.0


class TestPensiveOuterStep:
    def test_zero_delay_is_classical(self):
        ell = geo.ellipse(2.0, 1.0)
        od = outer.OuterDelay.zero()
        for _ in range(8):
            ang = RNG.uniform(0, TWO_PI)
            rad = RNG.uniform(2.4, 4.0)
            X = np.array([rad * math.cos(ang), rad * math.sin(ang)])
            assert np.linalg.norm(outer.pensive_outer_step(ell, od, X)
                                  - outer.outer_step(ell, X)) < 1e-12

    def test_circle_half_turn(self):
        # a(r) = pi r^2 / 2 shifts the bearing by pi: the image is the
        # antipode of the classical one, and each step rotates the orbit
        # by the classical angle plus pi at fixed radius.
        c = geo.disk(1.0)
        od = outer.OuterDelay.from_area(lambda r: 0.5 * math.pi * r * r)
        X = np.array([2.0, 0.0])
        Y = outer.pensive_outer_step(c, od, X)
        assert np.linalg.norm(Y + outer.outer_step(c, X)) < 1e-12
        d = 2.0
        step = math.pi - 2.0 * math.acos(1.0 / d)
        z = X.copy()
        ang = 0.0
        for _ in range(5):
            z = outer.pensive_outer_step(c, od, z)
            ang += step
            assert np.linalg.norm(z) == pytest.approx(d, abs=1e-10)
            got = math.atan2(z[1], z[0]) % TWO_PI
            assert got == pytest.approx(ang % TWO_PI, abs=1e-9)

    def test_r_preserved_and_bearing_shift(self):
        ell = geo.ellipse(2.0, 1.0)
        od = outer.OuterDelay.from_area(lambda r: r ** 3)
        X = np.array([1.7, 0.9])
        op = outer.tangent_coordinates(ell, X)
        Y = outer.pensive_outer_step(ell, od, X)
        opl = outer.tangent_coordinates(ell, Y, side="left")
        assert opl.r == pytest.approx(op.r, abs=1e-12)
        want = (op.alpha + od.shift(op.r)) % TWO_PI
        assert opl.alpha == pytest.approx(want, abs=1e-10)

    def test_swept_area_quadrature(self):
        # independent dual route: integrate the actual swept region with
        # finite-difference partials, no curvature formula involved
        ell = geo.ellipse(2.0, 1.0)
        od = outer.OuterDelay.from_area(lambda r: r ** 3)
        X = np.array([3.0, 1.0])
        op = outer.tangent_coordinates(ell, X)
        tq = outer._advance_tangency(ell, op.t, od.shift(op.r))

        h = 1e-6

        def jac(rho, t):
            tau = ell.tangent_t(t)
            gp = (ell.zpoint_t(t + h) - ell.zpoint_t(t - h)) / (2 * h)
            taup = (ell.tangent_t(t + h) - ell.tangent_t(t - h)) / (2 * h)
            rt = gp + rho * taup
            return abs(rt.real * tau.imag - rt.imag * tau.real)

        area, _ = dblquad(jac, op.t, tq, 0.0, op.r,
                          epsabs=1e-10, epsrel=1e-10)
        assert area == pytest.approx(od.area(op.r), rel=1e-8)

        # bearing advance quadrature matches r^2 theta / 2 exactly
        turn = outer._turn_integral(ell, op.t, tq)
        assert 0.5 * op.r ** 2 * turn == pytest.approx(od.area(op.r),
                                                       abs=1e-10)


class TestAreaPreservation:
    def test_classical_circle(self):
        c = geo.disk(1.0)
        ang = RNG.uniform(0, TWO_PI, 12)
        rad = RNG.uniform(1.5, 3.0, 12)
        pts = np.c_[rad * np.cos(ang), rad * np.sin(ang)]
        assert outer.area_preservation_check(
            c, outer.OuterDelay.zero(), pts) < 1e-6

    def test_pensive_ellipse_200_points(self):
        ell = geo.ellipse(2.0, 1.0)
        od = outer.OuterDelay.from_area(lambda r: r ** 3)
        ang = RNG.uniform(0, TWO_PI, 200)
        rad = RNG.uniform(2.6, 4.5, 200)
        pts = np.c_[rad * np.cos(ang), rad * np.sin(ang)]
        assert outer.area_preservation_check(ell, od, pts) < 1e-5

    def test_degenerate_delay_reported(self):
        # kinked a(r): determinant deviation is reported, not asserted
        ell = geo.ellipse(2.0, 1.0)
        od = outer.OuterDelay.from_area(lambda r: 0.3 * abs(r - 3.0) * r * r)
        pts = np.array([[3.0, 1.0], [0.0, 3.2], [-2.9, -0.7]])
        dev = outer.area_preservation_check(ell, od, pts)
        assert np.isfinite(dev)


class TestTangentChart:
    def test_jacobian_det_is_one_over_r(self):
        for curve in (geo.disk(1.0), geo.ellipse(2.0, 1.0)):
            for _ in range(6):
                ang = RNG.uniform(0, TWO_PI)
                rad = RNG.uniform(2.4, 4.0)
                X = np.array([rad * math.cos(ang), rad * math.sin(ang)])
                op = outer.tangent_coordinates(curve, X)
                h = 1e-6
                cols = []
                for d in (np.array([h, 0.0]), np.array([0.0, h])):
                    a = outer.tangent_coordinates(curve, X + d)
                    b = outer.tangent_coordinates(curve, X - d)
                    dal = (a.alpha - b.alpha + math.pi) % TWO_PI - math.pi
                    cols.append([dal / (2 * h), (a.r - b.r) / (2 * h)])
                det = cols[0][0] * cols[1][1] - cols[0][1] * cols[1][0]
                assert abs(det) == pytest.approx(1.0 / op.r, rel=1e-6)


class TestSphericalCurve:
    def test_validation(self):
        with pytest.raises(InvalidParameter):
            outer.SphericalCurve(lambda u: np.array([2 * math.cos(u),
                                                     2 * math.sin(u), 0.0]))

    def test_cap_dual_closed_form(self):
        psi = 0.8
        dual = outer.spherical_cap(psi).dual()
        for u in (0.0, 1.1, 3.9):
            want = np.array([-math.cos(psi) * math.cos(u),
                             -math.cos(psi) * math.sin(u),
                             math.sin(psi)])
            assert np.linalg.norm(dual.point(u) - want) < 1e-12

    def test_dual_identity_arclength_cap(self):
        # |g*'' . (g* x g*')| / |g*'|^2 = 1 for arc-length g
        psi = 0.75
        sp = math.sin(psi)

        def gam(s):
            return np.array([sp * math.cos(s / sp), sp * math.sin(s / sp),
                             math.cos(psi)])

        def dual_pt(s):
            h = 1e-4
            dg = (gam(s - 2 * h) - 8 * gam(s - h) + 8 * gam(s + h)
                  - gam(s + 2 * h)) / (12 * h)
            v = np.cross(gam(s), dg)
            return v / np.linalg.norm(v)

        for s in (0.1, 0.9, 2.2):
            h = 1e-3
            d1 = (dual_pt(s - 2 * h) - 8 * dual_pt(s - h)
                  + 8 * dual_pt(s + h) - dual_pt(s + 2 * h)) / (12 * h)
            d2 = (-dual_pt(s - 2 * h) + 16 * dual_pt(s - h)
                  - 30 * dual_pt(s) + 16 * dual_pt(s + h)
                  - dual_pt(s + 2 * h)) / (12 * h * h)
            val = abs(d2 @ np.cross(dual_pt(s), d1)) / (d1 @ d1)
            assert val == pytest.approx(1.0, abs=1e-6)

    def test_dual_identity_generic_parametrization(self):
        # parameter-free form: the dual sweep weight equals the speed
        crv = wobble_curve()
        dual = crv.dual()
        w = outer._sweep_weight(dual)
        for u in (0.3, 1.7, 4.4):
            speed = np.linalg.norm(crv.deriv(u))
            assert w(u) == pytest.approx(speed, rel=1e-6)


class TestSphereSweptArea:
    def test_equator_degenerate(self):
        eq = outer.SphericalCurve(
            lambda u: np.array([math.cos(u), math.sin(u), 0.0]),
            dfun=lambda u: np.array([-math.sin(u), math.cos(u), 0.0]),
            d2fun=lambda u: np.array([-math.cos(u), -math.sin(u), 0.0]))
        assert abs(outer.sphere_swept_area(eq, 0.0, TWO_PI, 0.9)) < 1e-12

    def test_archimedes_zones(self):
        for _ in range(20):
            h1 = RNG.uniform(0.2, 0.95)
            h2 = RNG.uniform(-h1 + 0.05, h1 - 0.05)
            cap = outer.spherical_cap(math.acos(h1))
            theta = math.acos(h2 / h1)
            area = outer.sphere_swept_area(cap, 0.0, TWO_PI, theta)
            assert area == pytest.approx(TWO_PI * (h1 - h2), abs=1e-8)

    def test_partial_arc_monte_carlo(self):
        psi, theta = 0.7, 0.9
        u1, u2 = 0.4, 2.9
        cap = outer.spherical_cap(psi)
        area = outer.sphere_swept_area(cap, u1, u2, theta)

        sp, cp = math.sin(psi), math.cos(psi)
        zmin, zmax = cp * math.cos(theta), cp
        n = 6_000_000
        z = RNG.uniform(zmin, zmax, n)
        phi = RNG.uniform(0.0, TWO_PI, n)
        beta = np.arccos(np.clip(z / cp, -1.0, 1.0))
        delta = np.arctan2(np.sin(beta), sp * np.cos(beta))
        uu = (phi - delta) % TWO_PI
        hits = np.count_nonzero((uu >= u1) & (uu <= u2))
        mc = hits / n * TWO_PI * (zmax - zmin)
        assert mc == pytest.approx(area, rel=1e-3)

    def test_rotation_invariance(self):
        psi = 0.7
        cap = outer.spherical_cap(psi)
        ax = np.array([0.3, -0.5, 0.81])
        ax /= np.linalg.norm(ax)
        k = np.array([[0, -ax[2], ax[1]], [ax[2], 0, -ax[0]],
                      [-ax[1], ax[0], 0]])
        rot = (np.eye(3) + math.sin(0.83) * k
               + (1 - math.cos(0.83)) * (k @ k))
        tilted = outer.SphericalCurve(lambda u: rot @ cap.point(u))
        a0 = outer.sphere_swept_area(cap, 0.4, 2.9, 0.9)
        a1 = outer.sphere_swept_area(tilted, 0.4, 2.9, 0.9)
        assert a1 == pytest.approx(a0, abs=1e-9)


class TestSphereDuality:
    def test_pole_geometry(self):
        cap = outer.spherical_cap(0.9)
        law = delay.zero()
        s, theta = 1.3, 0.7
        X, Y = outer.spherical_pensive_poles(cap, law, s, theta)
        p = cap.point(cap.u_of_s(s))
        assert abs(np.linalg.norm(X) - 1) < 1e-12
        assert abs(X @ p) < 1e-12
        assert abs(Y @ p) < 1e-12
        assert X @ Y == pytest.approx(math.cos(2 * theta), abs=1e-12)

    def test_classical_duality_cap(self):
        cap = outer.spherical_cap(0.9)
        samples = [(s, th) for s in np.linspace(0.1, 6.0, 10)
                   for th in np.linspace(0.15, 1.5, 5)]
        rep = outer.sphere_duality_check(cap, delay.zero(), samples)
        assert len(rep["samples"]) == 50
        assert rep["max_error"] < 1e-6

    def test_constant_delay_duality_cap(self):
        cap = outer.spherical_cap(0.9)
        samples = [(s, th) for s in np.linspace(0.1, 6.0, 10)
                   for th in np.linspace(0.15, 1.5, 5)]
        rep = outer.sphere_duality_check(cap, delay.constant(0.35), samples)
        assert rep["max_error"] < 1e-6

    def test_quarter_turn_area_relation(self):
        law = delay.constant(0.35)
        a = law.ell_theta(math.pi / 2) * (1 - math.cos(math.pi / 2))
        assert a == pytest.approx(law.ell_theta(math.pi / 2), abs=1e-15)

    def test_generic_curve_duality(self):
        crv = wobble_curve()
        samples = [(s, th) for s in (0.5, 2.7, 4.9) for th in (0.4, 1.0)]
        rep = outer.sphere_duality_check(crv, delay.constant(0.3), samples)
        assert rep["max_error"] < 1e-6
        rep2 = outer.sphere_duality_check(crv, delay.vortex(0.5),
                                          [(1.3, 0.8), (3.9, 1.2)])
        assert rep2["max_error"] < 1e-6

    def test_non_hemispherical_unsupported(self):
        eq = outer.SphericalCurve(
            lambda u: np.array([math.cos(u), math.sin(u), 0.0]))
        with pytest.raises(Unsupported):
            outer.sphere_duality_check(eq, delay.zero(), [(0.3, 0.7)])
