"""Outer billiards in the plane and the billiard/outer duality on the sphere.

In the plane the pensive outer map slides the tangency point until it
sweeps a prescribed area a(r) before reflecting the exterior point. On
the sphere, poles turn great circles into points: the billiard on a
curve with slide l~(theta) matches the outer map on the dual curve with
swept area a(r) = l~(r) (1 - cos r). The script renders a planar outer
orbit and tabulates the duality error on a cap and on a wobbly curve.
"""

import math
import os

import numpy as np

from pensive import delay
from pensive import geometry as geo
from pensive import outer
from pensive import svg

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "out")


def main():
    os.makedirs(OUT, exist_ok=True)

    ell = geo.ellipse(1.4, 1.0)
    od = outer.OuterDelay.from_area(lambda r: 0.4 * r * r)
    X = np.array([2.4, 0.8])
    orbit = [X]
    for _ in range(60):
        orbit.append(outer.pensive_outer_step(ell, od, orbit[-1]))
    pts = np.asarray(orbit)
    doc = svg.render_vortex_svg([pts], boundary=ell)
    with open(os.path.join(OUT, "outer_orbit.svg"), "w") as fh:
        fh.write(doc)
    rr = [outer.tangent_coordinates(ell, p).r for p in orbit[:8]]
    print("planar pensive outer orbit, first tangent lengths:")
    print("  " + "  ".join("%.4f" % r for r in rr))

    rng = np.random.default_rng(7)

    def report(curve, name):
        for law, tag in ((delay.zero(), "zero"),
                         (delay.constant(0.35), "constant 0.35"),
                         (delay.vortex(0.8), "vortex 0.8")):
            samples = [(rng.uniform(0, curve.length), rng.uniform(0.4, 2.2))
                       for _ in range(25)]
            rep = outer.sphere_duality_check(curve, law, samples)
            print("%-18s %-14s max pole error %.2e"
                  % (name, tag, rep["max_error"]))

    print("\nduality on the sphere: billiard on the curve vs outer map"
          " on its dual")
    report(outer.spherical_cap(0.8), "cap psi=0.8")
    wob = outer.SphericalCurve(
        lambda u: np.stack([
            np.sin(0.8 + 0.1 * np.sin(2 * u)) * np.cos(u),
            np.sin(0.8 + 0.1 * np.sin(2 * u)) * np.sin(u),
            np.cos(0.8 + 0.1 * np.sin(2 * u))], axis=-1))
    report(wob, "wobbly colatitude")
    print("wrote outer_orbit.svg to %s" % OUT)


if __name__ == "__main__":
    main()
