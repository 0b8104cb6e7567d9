"""Isogeny graphs G_N^m of ordinary curves with level structure.

A vertex is a class of pairs (E, P) with E one of the fixed curve models (one
per j-invariant of the base field) and P a point of exact order N p^m, up to
Aut(E). Every kernel of order l whose codomain has j in the base field gives
one directed edge, carrying P to its image on the target model.
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from math import gcd, lcm
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from sympy import factorint, isprime, legendre_symbol, multiplicity, n_order

from ..arithmetic import (
    AutGroup,
    Curve,
    FieldCtx,
    FieldElement,
    IsogenyStep,
    Point,
    TorsionStructure,
    Vertex,
    aut_group,
    canonical_generator,
    canonical_point,
    count_points_ext,
    curve_from_j,
    enumerate_kernels,
    field_embedding,
    frobenius_eigenvalue,
    isomorphism_scalar,
    make_field,
    scale_point,
    torsion_generators,
    trace_of_frobenius,
    velu_isogeny,
)
from ..core import (
    BudgetExceededError,
    FieldTooSmallError,
    InconsistentStructureError,
    ValidationError,
    check_budget,
    validate_positive,
    validate_prime,
)
from ..utilities import Settings, load_settings, run_ordered
from . import graphcore

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class BuildParams:
    p: int
    ell: int
    N: int = 1
    m: int = 0
    base_degree: int = 1
    j_filter: Optional[Tuple[int, ...]] = None
    exclude_special_j: bool = False
    seed: int = 0

    @property
    def level(self) -> int:
        """Order N p^m of the marked points."""
        return self.N * self.p**self.m

    def validate(self) -> "BuildParams":
        if not isinstance(self.p, int) or self.p <= 3 or not isprime(self.p):
            raise ValidationError(f"p must be a prime greater than 3, got {self.p}")
        validate_prime(self.ell, "l")
        if self.ell == self.p:
            raise ValidationError(f"l must differ from p (got l = p = {self.p})")
        validate_positive(self.N, "N")
        validate_positive(self.m, "m", minimum=0)
        validate_positive(self.base_degree, "base degree")
        if gcd(self.N, self.p * self.ell) != 1:
            raise ValidationError(f"N = {self.N} must be coprime to p*l = {self.p * self.ell}")
        return self

    def at_level(self, N: int, m: int) -> "BuildParams":
        return BuildParams(
            self.p, self.ell, N, m, self.base_degree, self.j_filter,
            self.exclude_special_j, self.seed,
        )


@dataclass
class CurveData:
    j: str
    base_curve: Curve
    curve: Curve
    aut: AutGroup
    torsion: TorsionStructure
    l_basis: Tuple[Point, Point]
    steps: List[IsogenyStep]
    targets: List[Optional[str]]
    scalars: List[Optional[FieldElement]]
    eigenvalues: List[Optional[int]]
    points: Dict[str, Point] = field(default_factory=dict)

    @property
    def trace(self) -> int:
        assert self.base_curve.trace is not None
        return self.base_curve.trace

    @property
    def stable_count(self) -> int:
        return sum(1 for e in self.eigenvalues if e is not None)

    @property
    def special(self) -> Optional[str]:
        if self.base_curve.has_j_1728():
            return "1728"
        if self.base_curve.has_j_0():
            return "0"
        return None


@dataclass
class ComponentInfo:
    index: int
    vertices: List[int]
    curves: List[str]
    trace: int
    d_pi: int
    fundamental_disc: int
    conductor: int
    depth: int
    kronecker: int
    distinct_neighbors: bool
    special_j: Optional[str]
    isolated: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "size": len(self.vertices),
            "curves": self.curves,
            "trace": self.trace,
            "d_pi": self.d_pi,
            "D_K": self.fundamental_disc,
            "conductor": self.conductor,
            "depth": self.depth,
            "kronecker": self.kronecker,
            "distinct_neighbors": self.distinct_neighbors,
            "special_j": self.special_j,
            "isolated": self.isolated,
        }


@dataclass
class IsogenyGraph:
    params: BuildParams
    working_degree: int
    graph: nx.MultiDiGraph
    base: FieldCtx
    work: FieldCtx
    curves: Dict[str, CurveData]
    vertices: List[Vertex]
    index: Dict[Vertex, int]
    components: List[ComponentInfo]
    levels: Dict[str, int]

    @property
    def order(self) -> int:
        return self.params.level

    def curve_of(self, vertex_id: int) -> Curve:
        return self.curves[self.vertices[vertex_id].j].curve

    def point_of(self, vertex_id: int) -> Point:
        vertex = self.vertices[vertex_id]
        return self.curves[vertex.j].points[vertex.point]

    def level_of(self, vertex_id: int) -> int:
        return self.levels[self.vertices[vertex_id].j]

    def component_of(self, vertex_id: int) -> ComponentInfo:
        return self.components[self.graph.nodes[vertex_id]["component"]]

    def lookup(self, j: str, point: Point) -> Optional[int]:
        """Vertex id of the class of (E_j, point), or None if absent."""
        data = self.curves.get(j)
        if data is None:
            return None
        serial = canonical_point(data.curve, point, data.aut).serialize()
        return self.index.get(Vertex(j, serial))

    def to_json(self) -> str:
        return graphcore.export_json(self.graph)

    def summary(self) -> Dict[str, Any]:
        return {
            "p": self.params.p,
            "l": self.params.ell,
            "N": self.params.N,
            "m": self.params.m,
            "working_degree": self.working_degree,
            "vertices": self.graph.number_of_nodes(),
            "edges": self.graph.number_of_edges(),
            "components": len(self.components),
        }


def kronecker(d: int, ell: int) -> int:
    """Kronecker symbol (d / ell) for a prime ell."""
    if ell == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    if d % ell == 0:
        return 0
    return int(legendre_symbol(d % ell, ell))


def fundamental_discriminant(d: int) -> Tuple[int, int]:
    """
    Args:
        d: negative discriminant, d = 0 or 1 mod 4

    Returns:
        (D_K, f) with d = f^2 D_K and D_K fundamental
    """
    if d >= 0 or d % 4 not in (0, 1):
        raise ValidationError(f"{d} is not a negative discriminant")
    square = 1
    for prime, exponent in factorint(-d).items():
        square *= prime ** (exponent // 2)
    core = d // (square * square)
    if core % 4 == 1:
        return core, square
    if square % 2:
        raise InconsistentStructureError(f"cannot split {d} into f^2 D_K")
    return 4 * core, square // 2


def _jordan2(n: int) -> int:
    total = n * n
    for prime in factorint(n):
        total = total // (prime * prime) * (prime * prime - 1)
    return total


def predicted_vertex_count(params: BuildParams, curve_count: int) -> int:
    """Generic vertex count: curves times points of order N p^m up to sign."""
    p, m = params.p, params.m
    cyclic = 1 if m == 0 else p**m - p ** (m - 1)
    per_curve = _jordan2(params.N) * cyclic
    if params.level > 2:
        per_curve //= 2
    return max(1, curve_count * per_curve)


def select_curves(params: BuildParams, settings: Optional[Settings] = None) -> Dict[str, Curve]:
    """One model per ordinary j-invariant of the base field, traces attached."""
    settings = settings or load_settings()
    base = make_field(params.p, params.base_degree)
    wanted = None
    if params.j_filter is not None:
        for value in params.j_filter:
            if not 0 <= value < base.order:
                raise ValidationError(f"j filter value {value} outside [0, {base.order})")
        wanted = {base.from_index(v).serialize() for v in params.j_filter}

    candidates = []
    for j in base.elements():
        serial = j.serialize()
        if wanted is not None and serial not in wanted:
            continue
        if params.exclude_special_j and (j.is_zero() or j == 1728):
            continue
        candidates.append(j)

    def _with_trace(j: FieldElement) -> Curve:
        curve = curve_from_j(j)
        return curve.with_trace(trace_of_frobenius(curve, settings.trace_budget))

    curves = run_ordered(
        _with_trace, candidates, settings.jobs, settings.progress, desc="Traces", unit="curve"
    )
    ordinary = {c.j_invariant().serialize(): c for c in curves if c.is_ordinary()}
    if not ordinary:
        raise ValidationError(f"no ordinary curves in scope over F_{base.order}")
    logger.debug("%d ordinary curves of %d candidates", len(ordinary), len(candidates))
    return ordinary


def _minimal_degree(params: BuildParams, q: int, curves: Sequence[Curve]) -> int:
    degree = lcm(2, int(n_order(q, params.ell)))
    if params.N > 1:
        degree = lcm(degree, int(n_order(q, params.N)))
    if any(c.has_j_1728() for c in curves):
        degree = lcm(degree, int(n_order(q, 4)))
    if any(c.has_j_0() for c in curves):
        degree = lcm(degree, int(n_order(q, 3)))
    return degree


def _divisibility_holds(params: BuildParams, q: int, curves: Sequence[Curve], degree: int) -> bool:
    needed = lcm(params.ell**2, params.N**2, params.p**params.m)
    for curve in curves:
        assert curve.trace is not None
        if count_points_ext(curve.trace, q, degree) % needed:
            return False
    return True


def degree_candidates(
    params: BuildParams, curves: Sequence[Curve], max_degree: int
) -> Iterator[int]:
    """Relative degrees D passing the point-count divisibility screen, in order."""
    q = params.p**params.base_degree
    step = _minimal_degree(params, q, curves)
    limit = max_degree // params.base_degree
    if step > limit:
        raise BudgetExceededError(
            f"working degree needs a multiple of {step} (roots of unity, l-torsion "
            f"pairing) but the budget allows at most {limit} over F_{q}"
        )
    for degree in range(step, limit + 1, step):
        if _divisibility_holds(params, q, curves, degree):
            yield degree


def _torsion_is_rational(
    params: BuildParams, curve: Curve, work: FieldCtx, degree: int, settings: Settings
) -> bool:
    assert curve.trace is not None
    q = params.p**params.base_degree
    group_order = count_points_ext(curve.trace, q, degree)
    rng = random.Random(f"{params.seed}:{curve.j_invariant().serialize()}")
    lifted = curve.lift(field_embedding(curve.ctx, work))
    for n in (params.ell, params.level):
        structure = torsion_generators(
            lifted, n, group_order, rng, settings.sample_retries, settings.torsion_budget
        )
        if not structure.rational:
            return False
    return aut_group(lifted).complete


def working_degree(
    params: BuildParams, curves: Dict[str, Curve], settings: Optional[Settings] = None
) -> int:
    """
    Args:
        params: graph parameters
        curves: ordinary curve models over the base field, traces attached
        settings: budgets

    Returns:
        Least relative degree D such that E[l], E[N p^m] and Aut(E) are rational
        over F_{q^D} for every curve

    Raises:
        BudgetExceededError: if no degree within the budget works
    """
    settings = settings or load_settings()
    models = [curves[j] for j in sorted(curves)]
    for degree in degree_candidates(params, models, settings.max_degree):
        work = make_field(params.p, params.base_degree * degree)
        if all(_torsion_is_rational(params, c, work, degree, settings) for c in models):
            logger.info("working degree %d over F_%d", degree, params.p**params.base_degree)
            return degree
    raise BudgetExceededError(
        f"no working degree up to {settings.max_degree // params.base_degree} makes "
        f"E[{params.ell}] and E[{params.level}] rational for {len(models)} curves"
    )


class _Builder:
    def __init__(self, params: BuildParams, curves: Dict[str, Curve], degree: int, settings: Settings):
        self.params = params
        self.settings = settings
        self.degree = degree
        self.base = make_field(params.p, params.base_degree)
        self.work = make_field(params.p, params.base_degree * degree)
        embedding = field_embedding(self.base, self.work)
        self.base_curves = curves
        self.lifted = {j: c.lift(embedding) for j, c in curves.items()}
        self.j_lookup = {c.j_invariant().key: j for j, c in self.lifted.items()}
        self.auts: Dict[str, AutGroup] = {}

    def prepare(self, j: str) -> CurveData:
        params, settings = self.params, self.settings
        curve = self.lifted[j]
        aut = aut_group(curve)
        if not aut.complete:
            raise FieldTooSmallError(f"Aut(E) of j={j} not rational over {self.work}")
        base_curve = self.base_curves[j]
        assert base_curve.trace is not None
        q = self.base.order
        group_order = count_points_ext(base_curve.trace, q, self.degree)
        rng = random.Random(f"{params.seed}:{j}")

        l_torsion = torsion_generators(
            curve, params.ell, group_order, rng, settings.sample_retries, settings.torsion_budget
        )
        level_torsion = torsion_generators(
            curve, params.level, group_order, rng, settings.sample_retries, settings.torsion_budget
        )
        if not (l_torsion.rational and level_torsion.rational):
            raise FieldTooSmallError(
                f"E[{params.ell}] or E[{params.level}] of j={j} not rational over {self.work}"
            )

        l_basis = l_torsion.generators
        data = CurveData(j, base_curve, curve, aut, level_torsion, l_basis, [], [], [], [])
        for kernel in enumerate_kernels(curve, params.ell, l_basis):
            step = velu_isogeny(curve, kernel, params.ell, l_basis)
            target = self.j_lookup.get(step.codomain.j_invariant().key)
            scalar = None
            if target is not None:
                scalar = isomorphism_scalar(step.codomain, self.lifted[target])
            data.steps.append(step)
            data.targets.append(target)
            data.scalars.append(scalar)
            data.eigenvalues.append(frobenius_eigenvalue(curve, step.kernel_gen, params.ell, q))

        for point in level_torsion.exact_order_points(curve, params.level):
            canonical = canonical_point(curve, point, aut)
            data.points.setdefault(canonical.serialize(), canonical)
        logger.debug(
            "j=%s: t=%d, %d vertices, %d kernels in scope",
            j,
            base_curve.trace,
            len(data.points),
            sum(t is not None for t in data.targets),
        )
        return data

    def edges(self, data: CurveData) -> List[Tuple[Vertex, Vertex, str, str]]:
        found = []
        ell = self.params.ell
        for serial in sorted(data.points):
            point = data.points[serial]
            src = Vertex(data.j, serial)
            stabilizer = [u for u in data.aut.scalars if scale_point(point, u) == point]
            for step, target, scalar in zip(data.steps, data.targets, data.scalars):
                if target is None or scalar is None:
                    continue
                image = scale_point(step.evaluate(point), scalar)
                target_curve = self.lifted[target]
                dst_point = canonical_point(target_curve, image, self.auts[target])
                dst = Vertex(target, dst_point.serialize())
                kernel = step.kernel_gen
                merged = any(
                    canonical_generator(data.curve, scale_point(kernel, u), ell) != kernel
                    for u in stabilizer
                )
                found.append((src, dst, step.kernel_serial, "aut-orbit" if merged else "kernel"))
        return found


def _curve_levels(
    params: BuildParams, q: int, curves: Dict[str, CurveData]
) -> Tuple[Dict[str, int], Dict[str, Tuple[int, int, int]]]:
    """
    Level of every curve and its (D_K, f, depth) triple.

    The model fixed for j = 0 or 1728 is one twist among several and need not
    share a trace with its neighbors, so special curves take the arithmetic of
    the regular curves in their component. Special curves always sit on the
    crater.
    """
    jgraph = nx.MultiGraph()
    jgraph.add_nodes_from(curves)
    for j, data in curves.items():
        for target in data.targets:
            if target is not None:
                jgraph.add_edge(j, target)

    arithmetic: Dict[str, Tuple[int, int, int]] = {}
    for j, data in curves.items():
        d_pi = data.trace**2 - 4 * q
        disc, conductor = fundamental_discriminant(d_pi)
        arithmetic[j] = (disc, conductor, multiplicity(params.ell, conductor))

    levels: Dict[str, int] = {}
    for part in nx.connected_components(jgraph):
        members = sorted(part)
        regular = [j for j in members if curves[j].special is None]
        if not regular:
            levels.update({j: 0 for j in members})
            continue
        depths = {arithmetic[j][2] for j in regular}
        if len(depths) != 1:
            raise InconsistentStructureError(f"curves {regular} disagree on depth {depths}")
        for j in members:
            if curves[j].special:
                arithmetic[j] = arithmetic[regular[0]]
        depth = depths.pop()
        if depth == 0:
            levels.update({j: 0 for j in members})
            continue
        if len(members) == 1:
            raise InconsistentStructureError(
                f"single curve {members[0]} with depth {depth} has no volcano"
            )
        floor = [j for j in regular if curves[j].stable_count == 1]
        if not floor:
            raise InconsistentStructureError(f"no floor found among {members} (depth {depth})")
        distance = nx.multi_source_dijkstra_path_length(jgraph.subgraph(members), set(floor))
        for j in members:
            level = 0 if curves[j].special else depth - distance[j]
            if not 0 <= level <= depth:
                raise InconsistentStructureError(f"j={j} at level {level} outside [0, {depth}]")
            levels[j] = level
    return levels, arithmetic


def _neighbors_distinct(graph: nx.MultiDiGraph, crater: List[int]) -> bool:
    level0 = set(crater)
    for v in crater:
        around = [w for _, w in graph.out_edges(v) if w in level0]
        around += [u for u, _ in graph.in_edges(v) if u in level0]
        if v in around or len(set(around)) != len(around):
            return False
    return True


def _component_infos(
    params: BuildParams,
    q: int,
    graph: nx.MultiDiGraph,
    vertices: List[Vertex],
    curves: Dict[str, CurveData],
    levels: Dict[str, int],
    arithmetic: Dict[str, Tuple[int, int, int]],
) -> List[ComponentInfo]:
    infos = []
    for index, members in enumerate(graphcore.components(graph)):
        names = sorted({vertices[v].j for v in members})
        regular = [j for j in names if curves[j].special is None]
        lead = curves[(regular or names)[0]]
        disc, conductor, depth = arithmetic[lead.j]
        specials = [curves[j].special for j in names if curves[j].special]
        crater = [v for v in members if levels[vertices[v].j] == 0]
        infos.append(
            ComponentInfo(
                index=index,
                vertices=list(members),
                curves=names,
                trace=lead.trace,
                d_pi=lead.trace**2 - 4 * q,
                fundamental_disc=disc,
                conductor=conductor,
                depth=depth,
                kronecker=kronecker(disc, params.ell),
                distinct_neighbors=_neighbors_distinct(graph, crater),
                special_j=specials[0] if specials else None,
                isolated=all(graph.degree(v) == 0 for v in members),
            )
        )
        for v in members:
            graph.nodes[v]["component"] = index
    return infos


def _build_at(
    params: BuildParams, curves: Dict[str, Curve], degree: int, settings: Settings
) -> IsogenyGraph:
    builder = _Builder(params, curves, degree, settings)
    names = sorted(curves)
    prepared = run_ordered(
        builder.prepare, names, settings.jobs, settings.progress, desc="Curves", unit="curve"
    )
    data = {d.j: d for d in prepared}
    builder.auts = {j: d.aut for j, d in data.items()}

    vertices = sorted(Vertex(j, s) for j, d in data.items() for s in d.points)
    check_budget(len(vertices), settings.vertex_budget, "vertex set")
    index = {v: i for i, v in enumerate(vertices)}

    edge_lists = run_ordered(
        builder.edges, prepared, settings.jobs, settings.progress, desc="Edges", unit="curve"
    )
    q = builder.base.order
    levels, arithmetic = _curve_levels(params, q, data)

    graph = graphcore.new_graph(
        p=params.p,
        l=params.ell,
        N=params.N,
        m=params.m,
        base_degree=params.base_degree,
        working_degree=degree,
    )
    for i, vertex in enumerate(vertices):
        graph.add_node(
            i, j=vertex.j, point=vertex.point, level=levels[vertex.j], component=None
        )
    records = []
    for src, dst, kernel, provenance in (e for edges in edge_lists for e in edges):
        if dst not in index:
            raise InconsistentStructureError(f"edge target {dst} is not a vertex")
        records.append((index[src], index[dst], kernel, provenance))
    for src_id, dst_id, kernel, provenance in sorted(records):
        graphcore.add_edge(graph, src_id, dst_id, "none", kernel, provenance=provenance)

    components = _component_infos(params, q, graph, vertices, data, levels, arithmetic)
    graph.graph["components"] = [c.to_dict() for c in components]
    result = IsogenyGraph(
        params, degree, graph, builder.base, builder.work, data, vertices, index, components, levels
    )
    logger.info(
        "G_%d^%d over F_%d: %d vertices, %d edges, %d components (D=%d)",
        params.N,
        params.m,
        q,
        graph.number_of_nodes(),
        graph.number_of_edges(),
        len(components),
        degree,
    )
    return result


def build_graph(
    params: BuildParams,
    settings: Optional[Settings] = None,
    working_degree: Optional[int] = None,
    curves: Optional[Dict[str, Curve]] = None,
) -> IsogenyGraph:
    """
    Args:
        params: graph parameters
        settings: budgets, jobs and progress flag
        working_degree: force this relative degree instead of searching
        curves: curve models to use (defaults to every ordinary j in scope)

    Returns:
        The graph G_N^m with levels, components and edge provenance

    Raises:
        ValidationError: on bad parameters
        BudgetExceededError: if no working degree fits the budget
    """
    params.validate()
    settings = settings or load_settings()
    curves = curves if curves is not None else select_curves(params, settings)
    check_budget(
        predicted_vertex_count(params, len(curves)), settings.vertex_budget, "predicted vertex set"
    )
    models = [curves[j] for j in sorted(curves)]

    if working_degree is not None:
        if working_degree * params.base_degree > settings.max_degree:
            raise BudgetExceededError(
                f"forced working degree {working_degree} exceeds the degree budget"
            )
        try:
            return _build_at(params, curves, working_degree, settings)
        except FieldTooSmallError as e:
            raise ValidationError(f"working degree {working_degree} is too small: {e}")

    for degree in degree_candidates(params, models, settings.max_degree):
        try:
            return _build_at(params, curves, degree, settings)
        except FieldTooSmallError as e:
            logger.debug("degree %d rejected: %s", degree, e)
    raise BudgetExceededError(
        f"no working degree up to {settings.max_degree // params.base_degree} fits "
        f"l={params.ell}, N={params.N}, m={params.m} over F_{params.p ** params.base_degree}"
    )


def assign_levels(ig: IsogenyGraph) -> IsogenyGraph:
    """Recompute the level of every curve and write it onto the vertices of ``ig``."""
    levels, _ = _curve_levels(ig.params, ig.base.order, ig.curves)
    ig.levels = levels
    for v in ig.graph.nodes:
        ig.graph.nodes[v]["level"] = levels[ig.vertices[v].j]
    return ig


def expected_crater_degree(info: ComponentInfo, special: Optional[str], ell: int) -> int:
    """Incident edges of a crater vertex: horizontal in and out plus vertical out."""
    if special == "1728" and ell == 2:
        return 4
    if special == "0" and ell == 3:
        return 5
    chi = info.kronecker
    vertical = ell - chi if info.depth > 0 else 0
    return 2 * (1 + chi) + vertical


def check_edge_counts(ig: IsogenyGraph) -> List[str]:
    """Crater vertices whose edge count differs from the expected one."""
    graph = ig.graph
    problems = []
    for info in ig.components:
        if not info.distinct_neighbors:
            continue
        for v in info.vertices:
            if ig.level_of(v) != 0:
                continue
            horizontal = sum(1 for _, w in graph.out_edges(v) if ig.level_of(w) == 0)
            horizontal += sum(1 for u, _ in graph.in_edges(v) if ig.level_of(u) == 0)
            vertical = sum(1 for _, w in graph.out_edges(v) if ig.level_of(w) == 1)
            special = ig.curves[ig.vertices[v].j].special
            expected = expected_crater_degree(info, special, ig.params.ell)
            if horizontal + vertical != expected:
                problems.append(
                    f"vertex {v}: {horizontal} horizontal + {vertical} vertical, expected {expected}"
                )
    return problems


def check_dual_closure(ig: IsogenyGraph) -> List[Tuple[int, int]]:
    """Edges (E,P) -> (E',P') lacking a return edge to (E, lP)."""
    missing = []
    graph, ell = ig.graph, ig.params.ell
    for src, dst in graph.edges():
        multiple = ig.curve_of(src).mul(ell, ig.point_of(src))
        back = ig.lookup(ig.vertices[src].j, multiple)
        if back is None or not graph.has_edge(dst, back):
            missing.append((src, dst))
    return missing


def non_isolated_curves(ig: IsogenyGraph) -> List[str]:
    """j-invariants of curves whose vertices carry at least one edge."""
    return sorted({ig.vertices[v].j for v in ig.graph.nodes if ig.graph.degree(v) > 0})


def project(
    high: IsogenyGraph, N_low: int, m_low: int, settings: Optional[Settings] = None
) -> Tuple[Dict[int, int], IsogenyGraph]:
    """
    Args:
        high: graph at level (N, m)
        N_low: divisor of N
        m_low: target exponent, at most m
        settings: budgets

    Returns:
        (vertex map, low graph) where the low graph is built over the same
        working field and each (E, P) maps to (E, (N p^r / N_low) P)
    """
    params = high.params
    if N_low < 1 or params.N % N_low:
        raise ValidationError(f"N' = {N_low} does not divide N = {params.N}")
    if not 0 <= m_low <= params.m:
        raise ValidationError(f"m' = {m_low} must lie in [0, {params.m}]")
    if N_low == params.N and m_low == params.m:
        return {v: v for v in high.graph.nodes}, high

    low_params = params.at_level(N_low, m_low)
    curves = {j: d.base_curve for j, d in high.curves.items()}
    low = build_graph(low_params, settings, working_degree=high.working_degree, curves=curves)
    return projection_map(high, low), low


def projection_map(high: IsogenyGraph, low: IsogenyGraph) -> Dict[int, int]:
    """Vertex map (E, P) -> (E, (N p^m / N' p^m') P) between graphs over one working field."""
    hp, lp = high.params, low.params
    if high.working_degree != low.working_degree or hp.base_degree != lp.base_degree:
        raise ValidationError("projection needs both graphs over the same working field")
    if hp.N % lp.N or lp.m > hp.m:
        raise ValidationError(f"level {lp.level} does not divide level {hp.level}")
    scale = (hp.N // lp.N) * hp.p ** (hp.m - lp.m)
    mapping = {}
    for v in high.graph.nodes:
        image = high.curve_of(v).mul(scale, high.point_of(v))
        target = low.lookup(high.vertices[v].j, image)
        if target is None:
            raise InconsistentStructureError(f"projection of vertex {v} has no image")
        mapping[v] = target
    return mapping


@dataclass
class CoveringReport:
    is_cover: bool
    degree: Optional[int]
    failures: List[str]
    fiber_sizes: Dict[int, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_cover": self.is_cover,
            "degree": self.degree,
            "failures": self.failures,
            "fiber_sizes": {str(k): v for k, v in sorted(self.fiber_sizes.items())},
        }


def _edge_label(attrs: Dict[str, Any], label: Optional[str]) -> Any:
    if label is None:
        return attrs.get("color")
    value = attrs.get(label)
    return value if value is not None else attrs.get("color")


def verify_covering(
    cover: nx.MultiDiGraph,
    base: nx.MultiDiGraph,
    vertex_map: Dict[Any, Any],
    edge_label: Optional[str] = "kernel",
    max_failures: int = 20,
) -> CoveringReport:
    """
    Check that ``vertex_map`` is a covering map onto the base components it
    reaches: surjective there, locally bijective on incoming and outgoing edges
    (matched by ``edge_label``) and with constant fibers per component.
    """
    failures: List[str] = []
    fibers: Dict[Any, int] = Counter()
    for v in cover.nodes:
        if v not in vertex_map or vertex_map[v] not in base:
            failures.append(f"vertex {v} has no image")
            continue
        fibers[vertex_map[v]] += 1

    for v in cover.nodes:
        if len(failures) >= max_failures:
            break
        image = vertex_map.get(v)
        if image not in base:
            continue
        for direction in ("out", "in"):
            if direction == "out":
                up = Counter(
                    (vertex_map.get(w), _edge_label(a, edge_label))
                    for _, w, a in cover.out_edges(v, data=True)
                )
                down = Counter(
                    (w, _edge_label(a, edge_label)) for _, w, a in base.out_edges(image, data=True)
                )
            else:
                up = Counter(
                    (vertex_map.get(u), _edge_label(a, edge_label))
                    for u, _, a in cover.in_edges(v, data=True)
                )
                down = Counter(
                    (u, _edge_label(a, edge_label)) for u, _, a in base.in_edges(image, data=True)
                )
            if up != down:
                failures.append(f"{direction}-edges of vertex {v} do not match those of {image}")

    sizes: Dict[int, int] = {}
    degrees = set()
    for index, members in enumerate(graphcore.components(base)):
        hit = [fibers.get(b, 0) for b in members]
        if not any(hit):
            continue
        if 0 in hit:
            failures.append(f"base component {index} is not covered entirely")
        counts = set(hit)
        if len(counts) != 1:
            failures.append(f"fiber sizes {sorted(counts)} vary over base component {index}")
        sizes[index] = max(hit)
        degrees.update(counts)

    degree = degrees.pop() if len(degrees) == 1 else None
    return CoveringReport(not failures, degree, failures[:max_failures], sizes)

