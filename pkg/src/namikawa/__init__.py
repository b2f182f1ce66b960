"""Stability of rank-one sheaf types on nodal curves, read off their dual graphs,
and the periodic zonotopal decompositions of tropical Jacobians they index.

All arithmetic is exact over the rationals.
"""

from .breakdiv import degree_g_equivalence, is_break_divisor_ineq, is_break_divisor_tree
from .graph import (
    CapExceeded,
    Divisor,
    Edge,
    EdgePoint,
    GraphError,
    MetricGraph,
    TropicalDivisor,
    Vertex,
    VertexPoint,
)
from .io import ProblemSpec, load_fixture, parse_problem
from .jacobian import (
    Decomposition,
    DecompositionError,
    abel_jacobi,
    face_poset,
    lattice_data,
    locate,
    namikawa_decomposition,
    refinement_map,
)
from .reduction import is_equivalent, reduce_divisor
from .stability import (
    Polarization,
    SheafType,
    StabilityError,
    classify,
    enumerate_types,
    grade,
    os_parameter,
    os_parameter_v,
)
from .verify import run_verify

__version__ = "0.1.0"

__all__ = [
    "CapExceeded",
    "Decomposition",
    "DecompositionError",
    "Divisor",
    "Edge",
    "EdgePoint",
    "GraphError",
    "MetricGraph",
    "Polarization",
    "ProblemSpec",
    "SheafType",
    "StabilityError",
    "TropicalDivisor",
    "Vertex",
    "VertexPoint",
    "abel_jacobi",
    "classify",
    "degree_g_equivalence",
    "enumerate_types",
    "face_poset",
    "grade",
    "is_break_divisor_ineq",
    "is_break_divisor_tree",
    "is_equivalent",
    "lattice_data",
    "load_fixture",
    "locate",
    "namikawa_decomposition",
    "os_parameter",
    "os_parameter_v",
    "parse_problem",
    "reduce_divisor",
    "refinement_map",
    "run_verify",
]
