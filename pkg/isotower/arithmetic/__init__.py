"""Finite fields, elliptic curves and isogenies."""

from .ecurve import (
    INFINITY,
    AutGroup,
    Curve,
    Point,
    TorsionStructure,
    Vertex,
    are_equivalent,
    aut_group,
    canonical_pair,
    canonical_point,
    count_points_ext,
    curve_from_j,
    isomorphism_scalar,
    scale_point,
    torsion_generators,
    trace_from_point_orders,
    trace_of_frobenius,
)
from .isogeny import (
    IsogenyStep,
    canonical_generator,
    enumerate_kernels,
    frobenius_eigenvalue,
    frobenius_roots,
    velu_isogeny,
    verify_dual,
)
from .qfield import (
    FieldCtx,
    FieldElement,
    FieldEmbedding,
    field_embedding,
    make_field,
    parse_element,
)

__all__ = [
    "INFINITY",
    "AutGroup",
    "Curve",
    "FieldCtx",
    "FieldElement",
    "FieldEmbedding",
    "IsogenyStep",
    "Point",
    "TorsionStructure",
    "Vertex",
    "are_equivalent",
    "aut_group",
    "canonical_generator",
    "canonical_pair",
    "canonical_point",
    "count_points_ext",
    "curve_from_j",
    "enumerate_kernels",
    "field_embedding",
    "frobenius_eigenvalue",
    "frobenius_roots",
    "isomorphism_scalar",
    "make_field",
    "parse_element",
    "scale_point",
    "torsion_generators",
    "trace_from_point_orders",
    "trace_of_frobenius",
    "velu_isogeny",
    "verify_dual",
]
