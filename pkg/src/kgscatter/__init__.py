"""Scattering-from-infinity laboratory for the 1-D cubic Klein-Gordon equation.

Symbolic side: an exact term algebra for oscillatory expansions whose
coefficients are differential polynomials in the scattering data, plus the
ladder of successively refined asymptotic solutions.  Numeric side: profile
ODE solvers with data at infinity, a hyperbolic-coordinate field marcher
and a Cartesian energy-tracking solver, and slope-fitting verification of
the predicted decay rates.
"""

from .coeffring import (
    CoeffPoly,
    CoeffRing,
    GenDeriv,
    Generator,
    GeneratorProfile,
    GeneratorShape,
    Monomial,
    constant_profile,
    gaussian_profile,
)
from .ladder import (
    InversionCertificate,
    Ladder,
    LadderLevel,
    build_ladder,
    corrected_carrier,
    divide_nonresonant,
    reduce_residual,
    resonant_correction,
)
from .oscillatory import (
    COS,
    SIN,
    Expansion,
    ExpansionEvaluator,
    MembershipVerdict,
    TermKey,
    classify,
    constant_generator_part,
    evaluate,
    in_nonresonant_class,
    in_order_class,
    leading_carrier,
    leading_linearization,
    serialize,
    wave_operator,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
