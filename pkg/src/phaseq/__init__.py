"""Verification toolkit for coherent-state quantization on symplectic
phase space: almost complex structures and their torsion, truncated Fock
quadrature, transition-map classification, theta sums on the torus, and
leafwise quantization of product spaces.
"""

from ._kernel import backend_name
from .errors import ConfigError, EvalError, ParseError, PhaseqError
from .expr import DualValue, Expression, parse, to_source, wirtinger
from .fock import (
    FockSpace,
    build_operators,
    coherent,
    coherent_radius_bound,
    expectation,
    number_state,
    overlap,
    resolution_of_unity,
    uncertainty_product,
    vacuum,
)
from .foliation import (
    FoliatedSpace,
    build_foliated,
    complement_scan_deviation,
    hybrid_coherent,
    leaf_resolution,
)
from .geometry import (
    AlmostComplexStructure,
    Chart,
    GridSpec,
    VectorField,
    check_acs,
    check_compatibility,
    lie_bracket,
    nijenhuis,
    omega_matrix,
    rotation_generator,
    standard_complex_structure,
)
from .maps import (
    PolynomialLift,
    TransitionMap,
    classify_linear,
    coherence_residual,
    cr_residual,
    holomorphic_vacuum_state,
    lift_normal_ordered,
    vacuum_transport_residual,
)
from .torus import (
    SL2Z,
    classify_moduli_pair,
    kahler_coefficient,
    reduce_to_fundamental_domain,
    theta,
)

__version__ = "0.1.0"

__all__ = [
    "AlmostComplexStructure",
    "Chart",
    "ConfigError",
    "DualValue",
    "EvalError",
    "Expression",
    "FockSpace",
    "FoliatedSpace",
    "GridSpec",
    "ParseError",
    "PhaseqError",
    "PolynomialLift",
    "SL2Z",
    "TransitionMap",
    "VectorField",
    "backend_name",
    "build_foliated",
    "build_operators",
    "check_acs",
    "check_compatibility",
    "classify_linear",
    "classify_moduli_pair",
    "coherence_residual",
    "coherent",
    "coherent_radius_bound",
    "complement_scan_deviation",
    "cr_residual",
    "expectation",
    "holomorphic_vacuum_state",
    "hybrid_coherent",
    "kahler_coefficient",
    "leaf_resolution",
    "lie_bracket",
    "lift_normal_ordered",
    "nijenhuis",
    "number_state",
    "omega_matrix",
    "overlap",
    "parse",
    "reduce_to_fundamental_domain",
    "resolution_of_unity",
    "rotation_generator",
    "standard_complex_structure",
    "theta",
    "to_source",
    "uncertainty_product",
    "vacuum",
    "vacuum_transport_residual",
    "wirtinger",
    "__version__",
]
