"""Signature, Toledo and eta invariants of flat symplectic bundles over surfaces."""

from .errors import (ConvergenceError, IntegralityError, NumericalError, SympSigError,
                     UnsupportedHolonomyError, ValidationError)
from .eta import circle_holonomy, eta_closed_sl2, eta_numeric, enumerate_spectrum, rho_invariant
from .siegel import act, fixed_point, kahler_form, triangle_integral
from .surface import (SurfacePresentation, SurfaceRepresentation, compute_invariants,
                      euler_characteristic, load_representation, make_representation, toledo,
                      triangulate)
from .symplectic import classify, is_symplectic

__version__ = "0.1.0"
