"""Discrete orthogonal polynomials and Delta-coherent pairs of the second kind.

Moment functionals of semiclassical discrete weights, their monic orthogonal
polynomials, and machine checks of the identities linking a coherent pair,
computed in exact rational arithmetic or certified ball arithmetic.
"""

from .coherence import (
    CoherentPairCase,
    build_case,
    classify_case,
    coherence_report,
    coherence_residual,
    dual_identity_check,
    functional_relation_check,
    lambdas_from_mops,
    tau,
    tau_bruteforce,
)
from .errors import (
    CoherentPairsError,
    ConsistencyError,
    ConvergenceError,
    DegenerateFunctional,
    InvalidParameter,
    ModeError,
    ResourceError,
)
from .functionals import MomentFunctional, christoffel, from_family, quasidefinite_profile
from .mops import MOPSequence, build_mops, prop2_check, structure_table
from .poly import FALLING, MONOMIAL, Polynomial, delta, nabla
from .scalar import Ball
from .sobolev import SobolevSystem, build_sobolev, connection_check, sobolev_inner
from .weights import FAMILIES, WeightFamily, make_family, pearson_data, pearson_residual

__version__ = "0.1.0"
