"""Isogeny graphs, craters, tectonic craters, towers and voltage assignments."""

from .crater import (
    CENSUS_CLASSES,
    CraterProfile,
    PrincipalCase,
    classify_component,
    classify_split,
    color_edges,
    crater_components,
    extract_crater,
    mark_census,
    principal_case,
    profile_craters,
)
from .graphcore import (
    colored_digraph_iso,
    components,
    export,
    export_dot,
    export_json,
    from_document,
    load_json,
    spanning_tree_count,
    to_document,
)
from .tectonic import (
    CMOracleInput,
    OracleProfile,
    SearchBounds,
    TectonicParams,
    Witness,
    cm_order_profile,
    generate,
    inverse_search,
    load_params,
    recognize,
)
from .tower import (
    IwasawaFit,
    TowerReport,
    build_tower,
    iwasawa_fit,
    stabilization_level,
)
from .volcano import (
    BuildParams,
    ComponentInfo,
    CoveringReport,
    IsogenyGraph,
    assign_levels,
    build_graph,
    check_dual_closure,
    check_edge_counts,
    project,
    projection_map,
    verify_covering,
)
from .voltage import (
    AppendixReport,
    VoltageData,
    build_voltage,
    check_dual_products,
    choose_bases,
    coboundary_between,
    compute_assignment,
    derived_graph,
    load_assignment,
    verify_appendix,
)

__all__ = [
    "CENSUS_CLASSES",
    "AppendixReport",
    "BuildParams",
    "CMOracleInput",
    "ComponentInfo",
    "CoveringReport",
    "CraterProfile",
    "IsogenyGraph",
    "IwasawaFit",
    "OracleProfile",
    "PrincipalCase",
    "SearchBounds",
    "TectonicParams",
    "TowerReport",
    "VoltageData",
    "Witness",
    "assign_levels",
    "build_graph",
    "build_tower",
    "build_voltage",
    "check_dual_closure",
    "check_dual_products",
    "check_edge_counts",
    "choose_bases",
    "classify_component",
    "classify_split",
    "cm_order_profile",
    "coboundary_between",
    "color_edges",
    "colored_digraph_iso",
    "components",
    "compute_assignment",
    "crater_components",
    "derived_graph",
    "export",
    "export_dot",
    "export_json",
    "extract_crater",
    "from_document",
    "generate",
    "inverse_search",
    "iwasawa_fit",
    "load_assignment",
    "load_json",
    "load_params",
    "mark_census",
    "principal_case",
    "profile_craters",
    "project",
    "projection_map",
    "recognize",
    "spanning_tree_count",
    "stabilization_level",
    "to_document",
    "verify_appendix",
    "verify_covering",
]
