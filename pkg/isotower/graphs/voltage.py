"""Voltage assignments on G_1^0 realizing G_1^m as a derived graph.

Each curve E gets a generator t_E of the cyclic group E[p^m]; an edge phi from
E1 to E2 (followed by the isomorphism onto the fixed model of E2) carries the
unit alpha with phi(t_E1) = alpha * t_E2. Vertices of the derived graph are
pairs (base vertex, unit); in the Aut-quotient convention units are taken
modulo the scalars by which Aut(E) acts on E[p^m].
"""

import logging
import random
from collections import Counter, deque
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx

from ..arithmetic import (
    INFINITY,
    Point,
    canonical_generator,
    canonical_point,
    count_points_ext,
    scale_point,
    torsion_generators,
)
from ..core import (
    FieldTooSmallError,
    InconsistentStructureError,
    IsotowerError,
    ValidationError,
)
from ..utilities import Settings, load_settings, run_ordered
from . import graphcore
from .volcano import BuildParams, IsogenyGraph, build_graph

logger = logging.getLogger(__name__)

EdgeKey = Tuple[int, int, str]
CONVENTIONS = ("aut-quotient", "full")


@dataclass
class Bases:
    points: Dict[str, Point]
    tree_edges: List[EdgeKey] = field(default_factory=list)
    seed: int = 0
    tree_mode: bool = False


@dataclass
class VoltageData:
    base: IsogenyGraph
    m: int
    modulus: int
    bases: Bases
    assignment: Dict[EdgeKey, int]
    aut_images: Dict[int, Tuple[int, ...]]
    tables: Dict[str, Dict[Tuple, int]] = field(default_factory=dict, repr=False)

    @property
    def units(self) -> List[int]:
        return [k for k in range(self.modulus) if gcd(k, self.modulus) == 1]

    def to_dict(self) -> Dict[str, Any]:
        base = self.base
        return {
            "p": base.params.p,
            "l": base.params.ell,
            "m": self.m,
            "modulus": self.modulus,
            "base_degree": base.params.base_degree,
            "working_degree": base.working_degree,
            "seed": self.bases.seed,
            "tree_mode": self.bases.tree_mode,
            "bases": {j: self.bases.points[j].serialize() for j in sorted(self.bases.points)},
            "aut_images": {str(v): list(a) for v, a in sorted(self.aut_images.items())},
            "assignment": [
                {
                    "src": src,
                    "dst": dst,
                    "kernel": kernel,
                    "voltage": alpha,
                    "voltage_pm": min(alpha, (-alpha) % self.modulus),
                }
                for (src, dst, kernel), alpha in sorted(self.assignment.items())
            ],
            "tree_edges": [list(e) for e in sorted(self.bases.tree_edges)],
        }


def load_assignment(document: Dict[str, Any]) -> Dict[EdgeKey, int]:
    """Edge voltages from a ``VoltageData.to_dict`` document."""
    try:
        modulus = int(document["modulus"])
        found = {}
        for record in document["assignment"]:
            key = (int(record["src"]), int(record["dst"]), str(record["kernel"]))
            alpha = int(record["voltage"])
            if gcd(alpha, modulus) != 1:
                raise ValidationError(f"voltage {alpha} on {key} is not a unit mod {modulus}")
            found[key] = alpha
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed voltage document: {e}")
    return found


class _EdgeMaps:
    """Isogeny-plus-isomorphism maps of the base graph, keyed by (curve, kernel)."""

    def __init__(self, base: IsogenyGraph):
        self.base = base
        self.maps: Dict[Tuple[str, str], Tuple[Any, Any, str]] = {}
        for j, data in base.curves.items():
            for step, target, scalar in zip(data.steps, data.targets, data.scalars):
                if target is not None and scalar is not None:
                    self.maps[(j, step.kernel_serial)] = (step, scalar, target)

    def image(self, j: str, kernel: str, point: Point) -> Point:
        step, scalar, _ = self.maps[(j, kernel)]
        return scale_point(step.evaluate(point), scalar)


def _edge_keys(base: IsogenyGraph) -> List[EdgeKey]:
    return sorted((u, v, k) for u, v, k in base.graph.edges(data="kernel"))


def _dlog_table(base: IsogenyGraph, j: str, gen: Point, modulus: int) -> Dict[Tuple, int]:
    curve = base.curves[j].curve
    table: Dict[Tuple, int] = {}
    current = INFINITY
    for k in range(modulus):
        table[current.key] = k
        current = curve.add(current, gen)
    if not current.is_infinity or len(table) != modulus:
        raise InconsistentStructureError(f"basis of j={j} does not have order {modulus}")
    return table


def _dlog(table: Dict[Tuple, int], point: Point, where: str) -> int:
    try:
        return table[point.key]
    except KeyError:
        raise InconsistentStructureError(f"discrete log failed on {where}")


def _torsion_generator(
    base: IsogenyGraph, j: str, modulus: int, rng: random.Random, settings: Settings
) -> Point:
    data = base.curves[j]
    if modulus == 1:
        return INFINITY
    group_order = count_points_ext(data.trace, base.base.order, base.working_degree)
    structure = torsion_generators(
        data.curve, modulus, group_order, rng, settings.sample_retries, settings.torsion_budget
    )
    if not structure.rational:
        raise FieldTooSmallError(f"E[{modulus}] of j={j} is not rational over {base.work}")
    gen = structure.generators[0]
    if data.curve.mul(modulus // base.params.p, gen).is_infinity:
        raise FieldTooSmallError(f"no point of exact order {modulus} found on j={j}")
    return gen.with_order(modulus)


def choose_bases(
    base: IsogenyGraph,
    m: int,
    seed: int = 0,
    tree: bool = False,
    settings: Optional[Settings] = None,
) -> Bases:
    """
    Args:
        base: the graph G_1^0 over a field where every E[p^m] is rational
        m: truncation level
        seed: fixes the random generators and unit rescalings
        tree: propagate one generator per component along a BFS spanning tree

    Returns:
        A generator t_E of E[p^m] for every curve, plus the tree edges used

    Raises:
        FieldTooSmallError: if some E[p^m] is not rational
    """
    settings = settings or load_settings()
    modulus = base.params.p**m
    units = [k for k in range(1, max(modulus, 2)) if gcd(k, modulus) == 1]
    points: Dict[str, Point] = {}
    rngs = {j: random.Random(f"{seed}:voltage:{j}") for j in sorted(base.curves)}
    for j in sorted(base.curves):
        gen = _torsion_generator(base, j, modulus, rngs[j], settings)
        points[j] = base.curves[j].curve.mul(rngs[j].choice(units), gen).with_order(modulus)
    if not tree:
        return Bases(points, [], seed, False)

    maps = _EdgeMaps(base)
    graph = base.graph
    tree_edges: List[EdgeKey] = []
    placed = set()
    for root in sorted(graph.nodes):
        if root in placed:
            continue
        placed.add(root)
        queue = deque([root])
        while queue:
            v = queue.popleft()
            j_v = base.vertices[v].j
            steps = [(v, w, k, True) for _, w, k in graph.out_edges(v, data="kernel")]
            steps += [(u, v, k, False) for u, _, k in graph.in_edges(v, data="kernel")]
            for src, dst, kernel, forward in sorted(steps):
                other = dst if forward else src
                if other in placed:
                    continue
                j_o = base.vertices[other].j
                if forward:
                    points[j_o] = maps.image(j_v, kernel, points[j_v]).with_order(modulus)
                else:
                    table = _dlog_table(base, j_v, points[j_v], modulus)
                    gen = points[j_o]
                    k = _dlog(table, maps.image(j_o, kernel, gen), f"tree edge {src}->{dst}")
                    points[j_o] = base.curves[j_o].curve.mul(pow(k, -1, modulus), gen).with_order(modulus)
                tree_edges.append((src, dst, kernel))
                placed.add(other)
                queue.append(other)
    logger.debug("spanning tree with %d edges", len(tree_edges))
    return Bases(points, tree_edges, seed, True)


def compute_assignment(
    base: IsogenyGraph, bases: Bases, m: int, settings: Optional[Settings] = None
) -> VoltageData:
    """Voltage alpha(e) for every edge of ``base`` by brute-force discrete logs."""
    settings = settings or load_settings()
    modulus = base.params.p**m
    tables = {
        j: _dlog_table(base, j, bases.points[j], modulus) for j in sorted(bases.points)
    }
    maps = _EdgeMaps(base)

    aut_images: Dict[int, Tuple[int, ...]] = {}
    for v in sorted(base.graph.nodes):
        j = base.vertices[v].j
        data, t = base.curves[j], bases.points[j]
        images = {
            _dlog(tables[j], scale_point(t, u), f"Aut(j={j})") for u in data.aut.scalars
        }
        aut_images[v] = tuple(sorted(images))

    def voltage(key: EdgeKey) -> int:
        src, dst, kernel = key
        j_src, j_dst = base.vertices[src].j, base.vertices[dst].j
        image = maps.image(j_src, kernel, bases.points[j_src])
        alpha = _dlog(tables[j_dst], image, f"edge {src}->{dst}")
        if gcd(alpha, modulus) != 1:
            raise InconsistentStructureError(f"voltage {alpha} on {key} is not a unit")
        return alpha

    keys = _edge_keys(base)
    values = run_ordered(voltage, keys, settings.jobs, settings.progress, desc="Voltages", unit="edge")
    return VoltageData(base, m, modulus, bases, dict(zip(keys, values)), aut_images, tables)


def _classes(vd: VoltageData, v: int, full_group: bool) -> Dict[int, int]:
    """Unit -> least element of its class at base vertex v."""
    modulus = vd.modulus
    images = (1 % modulus,) if full_group else vd.aut_images[v]
    label = {}
    for k in vd.units:
        label[k] = min(k * a % modulus for a in images)
    return label


def _representative(vd: VoltageData, v: int, unit: int) -> int:
    """The unit of the canonical Aut-orbit point of the class of unit * t_E."""
    j = vd.base.vertices[v].j
    data = vd.base.curves[j]
    point = data.curve.mul(unit, vd.bases.points[j])
    return _dlog(vd.tables[j], canonical_point(data.curve, point, data.aut), f"class at {v}")


def derived_graph(vd: VoltageData, full_group: bool = False) -> nx.MultiDiGraph:
    """
    Args:
        vd: voltage data on G_1^0
        full_group: fibers are all units mod p^m instead of Aut-orbits

    Returns:
        Graph with one vertex per (base vertex, unit class) and an edge
        (s, sigma) -> (t, sigma * alpha(e)) for every base edge e, sigma the
        class representative; node attributes ``base`` and ``unit``
    """
    base = vd.base
    graph = graphcore.new_graph(
        p=base.params.p,
        l=base.params.ell,
        N=1,
        m=vd.m,
        base_degree=base.params.base_degree,
        working_degree=base.working_degree,
        convention=CONVENTIONS[1] if full_group else CONVENTIONS[0],
    )
    labels = {v: _classes(vd, v, full_group) for v in base.graph.nodes}
    ids: Dict[Tuple[int, int], int] = {}
    for v in sorted(base.graph.nodes):
        for unit in sorted(set(labels[v].values())):
            ids[(v, unit)] = len(ids)
            graph.add_node(ids[(v, unit)], base=v, unit=unit, j=base.vertices[v].j)

    for (src, dst, kernel), alpha in sorted(vd.assignment.items()):
        for unit in sorted(set(labels[src].values())):
            sigma = unit if full_group else _representative(vd, src, unit)
            target = labels[dst][sigma * alpha % vd.modulus]
            graphcore.add_edge(graph, ids[(src, unit)], ids[(dst, target)], "none", kernel, voltage=alpha)
    return graph


def _natural_map(vd: VoltageData, derived: nx.MultiDiGraph, target: IsogenyGraph) -> Optional[Dict[int, int]]:
    mapping = {}
    for node, attrs in derived.nodes(data=True):
        j = attrs["j"]
        point = vd.base.curves[j].curve.mul(attrs["unit"], vd.bases.points[j])
        image = target.lookup(j, point)
        if image is None:
            return None
        mapping[node] = image
    if len(set(mapping.values())) != len(mapping):
        return None
    return mapping


def _kernel_counter(graph: nx.MultiDiGraph, mapping: Optional[Dict[int, int]] = None) -> Counter:
    move = mapping or {}
    return Counter((move.get(u, u), move.get(v, v), k) for u, v, k in graph.edges(data="kernel"))


def _compare(
    vd: VoltageData, target: IsogenyGraph, full_group: bool, matcher_limit: int
) -> Dict[str, Any]:
    derived = derived_graph(vd, full_group)
    outcome: Dict[str, Any] = {
        "vertices": derived.number_of_nodes(),
        "target_vertices": target.graph.number_of_nodes(),
        "edges": derived.number_of_edges(),
        "target_edges": target.graph.number_of_edges(),
        "isomorphic": False,
        "method": None,
    }
    if (outcome["vertices"], outcome["edges"]) != (outcome["target_vertices"], outcome["target_edges"]):
        outcome["method"] = "counts differ"
        return outcome
    mapping = _natural_map(vd, derived, target)
    if mapping is not None and _kernel_counter(derived, mapping) == _kernel_counter(target.graph):
        outcome.update(isomorphic=True, method="fiber map")
        return outcome
    try:
        found = graphcore.colored_digraph_iso(derived, target.graph, fallback_limit=matcher_limit)
    except ValidationError as e:
        outcome["method"] = f"undecided: {e}"
        return outcome
    outcome.update(isomorphic=found is not None, method="matcher")
    return outcome


def check_dual_products(vd: VoltageData) -> List[str]:
    """Edges e whose dual edge e' fails alpha(e) alpha(e') in l * Aut-image."""
    base, modulus, ell = vd.base, vd.modulus, vd.base.params.ell
    maps = _EdgeMaps(base)
    failures = []
    for (src, dst, kernel), alpha in sorted(vd.assignment.items()):
        j_src, j_dst = base.vertices[src].j, base.vertices[dst].j
        images = [maps.image(j_src, kernel, q) for q in base.curves[j_src].l_basis]
        gen = next((q for q in images if not q.is_infinity), None)
        if gen is None:
            failures.append(f"edge {src}->{dst} kills E[{ell}]")
            continue
        dual_kernel = canonical_generator(base.curves[j_dst].curve, gen, ell).serialize()
        back = vd.assignment.get((dst, src, dual_kernel))
        if back is None:
            failures.append(f"edge {src}->{dst} has no dual edge")
            continue
        allowed = {ell * a % modulus for a in vd.aut_images[src]}
        if alpha * back % modulus not in allowed:
            failures.append(f"edge {src}->{dst}: {alpha} * {back} not in {sorted(allowed)}")
    return failures


@dataclass
class AppendixReport:
    m: int
    conventions: Dict[str, Dict[str, Any]]
    dual_failures: List[str]
    tree_trivial: Optional[bool] = None

    @property
    def matched(self) -> List[str]:
        return [name for name in CONVENTIONS if self.conventions[name]["isomorphic"]]

    @property
    def ok(self) -> bool:
        return bool(self.matched) and not self.dual_failures and self.tree_trivial is not False

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "conventions": self.conventions,
            "matched": self.matched,
            "dual_failures": self.dual_failures,
            "tree_trivial": self.tree_trivial,
            "ok": self.ok,
        }


def verify_appendix(
    vd: VoltageData, target: IsogenyGraph, settings: Optional[Settings] = None
) -> AppendixReport:
    """Compare both derived graphs with G_1^m built directly over the same field."""
    settings = settings or load_settings()
    if target.params.m != vd.m or target.params.N != 1:
        raise ValidationError(f"comparison graph must be G_1^{vd.m}, got level {target.params.level}")
    if target.working_degree != vd.base.working_degree:
        raise ValidationError("comparison graph lives over a different working field")
    conventions = {
        name: _compare(vd, target, name == "full", settings.matcher_limit) for name in CONVENTIONS
    }
    tree_trivial = None
    if vd.bases.tree_mode:
        tree_trivial = all(vd.assignment[e] == 1 % vd.modulus for e in vd.bases.tree_edges)
    report = AppendixReport(vd.m, conventions, check_dual_products(vd), tree_trivial)
    logger.info("derived graph check at m=%d: matched %s", vd.m, report.matched or "none")
    return report


@dataclass
class CoboundaryReport:
    is_coboundary: bool
    ratios: Dict[str, int]
    failures: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "is_coboundary": self.is_coboundary,
            "ratios": {j: u for j, u in sorted(self.ratios.items())},
            "failures": self.failures,
        }


def coboundary_between(first: VoltageData, second: VoltageData) -> CoboundaryReport:
    """
    Check alpha2(e) = alpha1(e) u_src / u_dst where t2_E = u_E t1_E.

    Both assignments must sit on the same base graph.
    """
    if first.base is not second.base or first.m != second.m:
        raise ValidationError("coboundary check needs two assignments on one base graph and level")
    modulus = first.modulus
    ratios = {
        j: _dlog(first.tables[j], second.bases.points[j], f"rescaling of j={j}")
        for j in sorted(first.bases.points)
    }
    failures = []
    for key, alpha in sorted(first.assignment.items()):
        src, dst, _ = key
        u_src = ratios[first.base.vertices[src].j]
        u_dst = ratios[first.base.vertices[dst].j]
        expected = alpha * u_src * pow(u_dst, -1, modulus) % modulus if modulus > 1 else 0
        if second.assignment.get(key) != expected:
            failures.append(f"edge {key}: {second.assignment.get(key)} != {expected}")
    return CoboundaryReport(not failures, ratios, failures)


def build_voltage(
    params: BuildParams,
    seed: int = 0,
    tree: bool = False,
    settings: Optional[Settings] = None,
) -> Tuple[VoltageData, IsogenyGraph]:
    """
    Build G_1^m directly, then G_1^0 over the same working field with a
    voltage assignment on it.
    """
    settings = settings or load_settings()
    params.validate()
    if params.N != 1:
        raise ValidationError(f"voltage assignments are built for N = 1, got N = {params.N}")
    target = build_graph(params, settings)
    curves = {j: d.base_curve for j, d in target.curves.items()}
    base = build_graph(
        params.at_level(1, 0), settings, working_degree=target.working_degree, curves=curves
    )
    try:
        bases = choose_bases(base, params.m, seed, tree, settings)
    except IsotowerError:
        logger.error("could not fix E[p^%d] bases over degree %d", params.m, base.working_degree)
        raise
    return compute_assignment(base, bases, params.m, settings), target
