"""Billiards with boundary slides, their variational structure, point-vortex
dipoles, and outer billiards.

The submodules are the primary interface::

    from pensive import geometry, delay, billiard, variational
    from pensive import twist, vortex, outer, svg

The names re-exported here cover the common entry points: table
construction, delay laws, the map itself, and the certificate /
simulation routines built on top of it.
"""

from . import errors
from .geometry import (disk, ellipse, neumann_oval, regular_polygon,
                       curve_from_points, curve_from_config)
from .delay import (zero, constant, linear, puck, vortex as vortex_delay,
                    vortex_for, generalized_puck, PuckMetric,
                    delay_from_config)
from .billiard import (PhasePoint, Trajectory, pensive_step, pensive_batch,
                       iterate, iet_realize, measure_jacobian_det,
                       caustic_radius)
from .variational import generating_function, periodic_orbit_search
from .twist import twist_certificate, thin_ellipse_counterexample
from .vortex import (HalfPlane, DiskDomain, NeumannOvalDomain,
                     VortexConfiguration, make_dipole, integrate,
                     fission_outcome, fusion_outcome,
                     dipole_billiard_limit_check, multi_dipole_simulate)
from .outer import (tangent_coordinates, outer_step, OuterDelay,
                    pensive_outer_step, area_preservation_check,
                    SphericalCurve, spherical_cap, sphere_swept_area,
                    spherical_outer_step, sphere_duality_check)

__version__ = "0.1.0"

__all__ = [
    "errors",
    "disk", "ellipse", "neumann_oval", "regular_polygon",
    "curve_from_points", "curve_from_config",
    "zero", "constant", "linear", "puck", "vortex_delay", "vortex_for",
    "generalized_puck", "PuckMetric", "delay_from_config",
    "PhasePoint", "Trajectory", "pensive_step", "pensive_batch",
    "iterate", "iet_realize", "measure_jacobian_det", "caustic_radius",
    "generating_function", "periodic_orbit_search",
    "twist_certificate", "thin_ellipse_counterexample",
    "HalfPlane", "DiskDomain", "NeumannOvalDomain",
    "VortexConfiguration", "make_dipole", "integrate",
    "fission_outcome", "fusion_outcome",
    "dipole_billiard_limit_check", "multi_dipole_simulate",
    "tangent_coordinates", "outer_step", "OuterDelay",
    "pensive_outer_step", "area_preservation_check",
    "SphericalCurve", "spherical_cap", "sphere_swept_area",
    "spherical_outer_step", "sphere_duality_check",
    "__version__",
]
