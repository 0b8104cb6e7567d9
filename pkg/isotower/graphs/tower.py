"""Abelian p-towers of isogeny graphs G_N^m for m >= m0.

Levels are built over one working field so the projection (E, P) -> (E, pP)
and the deck action (E, P) -> (E, aP) are computed on the same point sets.
"""

import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx
from sympy import multiplicity, n_order

from ..arithmetic import Curve
from ..core import BudgetExceededError, ValidationError, validate_positive
from ..utilities import Settings, load_settings, run_ordered
from . import graphcore
from .volcano import (
    BuildParams,
    IsogenyGraph,
    build_graph,
    predicted_vertex_count,
    projection_map,
    select_curves,
    verify_covering,
)

logger = logging.getLogger(__name__)

MAX_TOWER_HEIGHT = 6


def stabilization_level(N: int, p: int, ell: int) -> Tuple[int, int]:
    """
    Args:
        N: tame level
        p: odd prime
        ell: prime coprime to N p

    Returns:
        (m0, c) with the order of ell modulo N p^m equal to c p^(m - m0) for
        every m >= m0, m0 >= 1 least
    """
    validate_positive(N, "N")
    if p < 3 or ell % p == 0 or (N > 1 and n_order_safe(ell, N) is None):
        raise ValidationError(f"l = {ell} must be coprime to N p = {N * p} with p odd")
    first = int(n_order(ell, p))
    lifting = multiplicity(p, pow(ell, first) - 1)
    tame = n_order_safe(ell, N) or 1
    horizon = lifting + multiplicity(p, tame) + 3
    orders = [int(n_order(ell, N * p**m)) for m in range(1, horizon + 1)]
    m0 = horizon - 1
    while m0 > 1 and orders[m0 - 1] == p * orders[m0 - 2]:
        m0 -= 1
    return m0, orders[m0 - 1]


def n_order_safe(value: int, modulus: int) -> Optional[int]:
    if modulus == 1:
        return 1
    try:
        return int(n_order(value, modulus))
    except ValueError:
        return None


@dataclass(frozen=True)
class IwasawaFit:
    mu: int
    lam: int
    nu: int
    start: int

    def to_dict(self) -> Dict[str, int]:
        return {"mu": self.mu, "lambda": self.lam, "nu": self.nu, "n_start": self.start}


def _solve_last_three(ords: List[int], p: int) -> Optional[Tuple[int, int, int]]:
    n = len(ords) - 3
    d1 = ords[n + 1] - ords[n]
    d2 = ords[n + 2] - ords[n + 1]
    scale = (p - 1) ** 2 * p**n
    if (d2 - d1) % scale:
        return None
    mu = (d2 - d1) // scale
    lam = d1 - mu * p**n * (p - 1)
    if mu < 0 or lam < 0:
        return None
    nu = ords[n] - mu * p**n - lam * n
    return mu, lam, nu


def iwasawa_fit(ords: List[int], p: int) -> Optional[IwasawaFit]:
    """
    Args:
        ords: ord_p(kappa_n) for n = 0, 1, ...
        p: the tower prime

    Returns:
        Exact integers with ords[n] = mu p^n + lam n + nu on the longest
        suffix, or None when fewer than three points fit
    """
    if len(ords) < 3:
        return None
    solved = _solve_last_three(ords, p)
    if solved is None:
        return None
    mu, lam, nu = solved
    for start in range(len(ords) - 2):
        if all(ords[n] == mu * p**n + lam * n + nu for n in range(start, len(ords))):
            return IwasawaFit(mu, lam, nu, start)
    return None


@dataclass
class TowerLevel:
    m: int
    r: int
    vertices: int
    edges: int
    components: int
    cover: Optional[Dict[str, Any]] = None
    step_cover: Optional[Dict[str, Any]] = None
    deck_order: int = 1
    deck_automorphisms: bool = True
    deck_free: bool = True
    deck_commutes: bool = True
    deck_count: Optional[int] = None
    fibers_ok: bool = True
    kappa: Optional[int] = None
    ord_p: Optional[int] = None
    failures: List[str] = field(default_factory=list)

    @property
    def verified(self) -> bool:
        covers = all(c is None or c["is_cover"] for c in (self.cover, self.step_cover))
        return (
            covers
            and self.deck_automorphisms
            and self.deck_free
            and self.deck_commutes
            and self.deck_count == self.deck_order
            and self.fibers_ok
            and not self.failures
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "m": self.m,
            "r": self.r,
            "vertices": self.vertices,
            "edges": self.edges,
            "components": self.components,
            "cover": self.cover,
            "step_cover": self.step_cover,
            "deck": {
                "order": self.deck_order,
                "automorphisms": self.deck_automorphisms,
                "free": self.deck_free,
                "commutes": self.deck_commutes,
                "count": self.deck_count,
            },
            "fibers_ok": self.fibers_ok,
            "kappa": self.kappa,
            "ord_p": self.ord_p,
            "verified": self.verified,
            "failures": self.failures,
        }


@dataclass
class TowerReport:
    p: int
    ell: int
    N: int
    m0: int
    c: int
    anchor: Optional[int]
    curves: List[str]
    isolated_curves: List[str]
    working_degree: Optional[int] = None
    below: List[Dict[str, int]] = field(default_factory=list)
    levels: List[TowerLevel] = field(default_factory=list)
    fit: Optional[IwasawaFit] = None
    truncated: Optional[str] = None
    graphs: List[IsogenyGraph] = field(default_factory=list, repr=False)

    @property
    def components_stable(self) -> bool:
        return len({level.components for level in self.levels}) <= 1

    @property
    def verified(self) -> bool:
        return self.components_stable and all(level.verified for level in self.levels)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "l": self.ell,
            "N": self.N,
            "m0": self.m0,
            "c": self.c,
            "anchor": self.anchor,
            "curves": self.curves,
            "isolated_curves": self.isolated_curves,
            "working_degree": self.working_degree,
            "below": self.below,
            "levels": [level.to_dict() for level in self.levels],
            "components_stable": self.components_stable,
            "fit": self.fit.to_dict() if self.fit else "insufficient levels",
            "truncated": self.truncated,
            "verified": self.verified,
        }


def tower_curves(
    params: BuildParams, anchor: Optional[int], settings: Settings
) -> Tuple[Dict[str, Curve], List[str]]:
    """Curves of the anchor's component of G_N^0, or every non-isolated curve."""
    everything = select_curves(params, settings)
    ground = build_graph(params.at_level(params.N, 0), settings, curves=everything)
    isolated = sorted(
        j for j in everything
        if all(ground.graph.degree(v) == 0 for v in ground.graph.nodes if ground.vertices[v].j == j)
    )
    if anchor is None:
        chosen = [j for j in everything if j not in isolated]
    else:
        if not 0 <= anchor < ground.base.order:
            raise ValidationError(f"anchor j = {anchor} outside [0, {ground.base.order})")
        serial = ground.base.from_index(anchor).serialize()
        if serial not in everything:
            raise ValidationError(f"anchor j = {anchor} is not an ordinary j-invariant in scope")
        if serial in isolated:
            raise ValidationError(f"anchor j = {anchor} lies on an isolated component")
        vertex = min(v for v in ground.graph.nodes if ground.vertices[v].j == serial)
        chosen = ground.component_of(vertex).curves
    if not chosen:
        raise ValidationError("every curve in scope is isolated; the tower is empty")
    return {j: everything[j] for j in sorted(chosen)}, isolated


def default_height(params: BuildParams, m0: int, curve_count: int, settings: Settings) -> int:
    """Largest r whose predicted vertex count stays within the vertex budget."""
    height = 0
    while height < MAX_TOWER_HEIGHT:
        nxt = params.at_level(params.N, m0 + height + 1)
        if predicted_vertex_count(nxt, curve_count) > settings.vertex_budget:
            break
        height += 1
    return height


def _count_components(graph: nx.MultiDiGraph) -> int:
    return sum(
        1 for part in graphcore.components(graph) if any(graph.degree(v) for v in part)
    )


def _kappa(graph: nx.MultiDiGraph) -> int:
    """
    Product of spanning-tree counts over the components with edges.

    A level with several components gets the product of their counts, so
    ord_p(kappa_n) is the sum over components. Isolated vertices count as 1.
    """
    kappa = 1
    for part in graphcore.components(graph):
        if any(graph.degree(v) for v in part):
            kappa *= graphcore.spanning_tree_count(graph.subgraph(part))
    return kappa


def unit_subgroup(level: int, base_level: int) -> List[int]:
    """Units a mod level with a = 1 mod base_level, in increasing order."""
    return list(range(1, level, base_level)) or [1]


def _act(ig: IsogenyGraph, a: int) -> Optional[Dict[int, int]]:
    mapping = {}
    for v in ig.graph.nodes:
        image = ig.lookup(ig.vertices[v].j, ig.curve_of(v).mul(a, ig.point_of(v)))
        if image is None:
            return None
        mapping[v] = image
    return mapping


def _kernel_edges(graph: nx.MultiDiGraph, mapping: Optional[Dict[int, int]] = None) -> Counter:
    move = mapping or {}
    return Counter(
        (move.get(u, u), move.get(v, v), k) for u, v, k in graph.edges(data="kernel")
    )


def _lift(
    ig: IsogenyGraph, down: Dict[int, int], start: int, image: int
) -> Optional[Dict[int, int]]:
    """Extend start -> image to a projection-preserving map of the component."""
    graph = ig.graph
    mapping = {start: image}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        w = mapping[v]
        moves = []
        for _, x, k in graph.out_edges(v, data="kernel"):
            match = [y for _, y, kk in graph.out_edges(w, data="kernel") if kk == k and down[y] == down[x]]
            if len(match) != 1:
                return None
            moves.append((x, match[0]))
        for x, _, k in graph.in_edges(v, data="kernel"):
            match = [y for y, _, kk in graph.in_edges(w, data="kernel") if kk == k and down[y] == down[x]]
            if len(match) != 1:
                return None
            moves.append((x, match[0]))
        for x, y in moves:
            if x in mapping:
                if mapping[x] != y:
                    return None
                continue
            mapping[x] = y
            queue.append(x)
    if len(set(mapping.values())) != len(mapping):
        return None
    return mapping


def _deck_count(ig: IsogenyGraph, down: Dict[int, int]) -> int:
    """Deck transformations of the component of the least vertex, counted by lifting."""
    graph = ig.graph
    start = min(v for v in graph.nodes if graph.degree(v) > 0)
    part = nx.node_connected_component(graph.to_undirected(as_view=True), start)
    sub = graph.subgraph(part)
    fiber = sorted(v for v in part if down[v] == down[start])
    count = 0
    for target in fiber:
        lift = _lift(ig, down, start, target)
        if lift is not None and len(lift) == len(part) and _kernel_edges(sub, lift) == _kernel_edges(sub):
            count += 1
    return count


def _check_deck(
    ig: IsogenyGraph, down: Dict[int, int], base_level: int, level: TowerLevel
) -> None:
    reference = _kernel_edges(ig.graph)
    group = unit_subgroup(ig.params.level, base_level)
    level.deck_order = len(group)
    for a in group:
        mapping = _act(ig, a)
        if mapping is None or len(set(mapping.values())) != len(mapping):
            level.deck_automorphisms = False
            level.failures.append(f"a = {a} does not permute the vertices")
            continue
        if _kernel_edges(ig.graph, mapping) != reference:
            level.deck_automorphisms = False
            level.failures.append(f"a = {a} does not preserve edges")
        if any(down[mapping[v]] != down[v] for v in mapping):
            level.deck_commutes = False
            level.failures.append(f"a = {a} does not commute with the projection")
        if a != 1 and any(mapping[v] == v for v in mapping):
            level.deck_free = False
            level.failures.append(f"a = {a} fixes a vertex")
    level.deck_count = _deck_count(ig, down) if ig.graph.number_of_edges() else len(group)


def _check_fibers(
    ig: IsogenyGraph, down: Dict[int, int], ell: int, c: int, level: TowerLevel
) -> None:
    fibers: Dict[int, List[int]] = {}
    for v, image in down.items():
        fibers.setdefault(image, []).append(v)
    expected = level.deck_order
    step = pow(ell, c, ig.params.level)
    for image, members in sorted(fibers.items()):
        lead = min(members)
        curve, point = ig.curve_of(lead), ig.point_of(lead)
        orbit = set()
        scalar = 1
        for _ in range(expected):
            orbit.add(ig.lookup(ig.vertices[lead].j, curve.mul(scalar, point)))
            scalar = scalar * step % ig.params.level
        if orbit != set(members) or len(members) != expected:
            level.fibers_ok = False
            level.failures.append(
                f"fiber over {image} has {len(members)} vertices, not the l^(c n) orbit of size {expected}"
            )
            if len(level.failures) > 20:
                return


def build_tower(
    params: BuildParams,
    r_max: Optional[int] = None,
    anchor: Optional[int] = None,
    settings: Optional[Settings] = None,
) -> TowerReport:
    """
    Args:
        params: p, l, N and base field; ``m`` is ignored
        r_max: tower height above m0 (default: largest within the vertex budget)
        anchor: j-invariant (as a base field index) picking the component
        settings: budgets, jobs and seed

    Returns:
        Per-level covers, deck groups, fibers and spanning-tree counts with
        the fitted Iwasawa invariants

    Raises:
        ValidationError: on bad parameters or an isolated anchor
        BudgetExceededError: if even the level m0 cannot be built
    """
    settings = settings or load_settings()
    params = params.at_level(params.N, 0).validate()
    m0, c = stabilization_level(params.N, params.p, params.ell)
    curves, isolated = tower_curves(params, anchor, settings)
    report = TowerReport(params.p, params.ell, params.N, m0, c, anchor, sorted(curves), isolated)
    height = default_height(params, m0, len(curves), settings) if r_max is None else r_max
    validate_positive(height, "r_max", minimum=0)
    logger.info("tower over %d curves: m0=%d, c=%d, height %d", len(curves), m0, c, height)

    top: Optional[IsogenyGraph] = None
    while top is None:
        try:
            top = build_graph(params.at_level(params.N, m0 + height), settings, curves=curves)
        except BudgetExceededError as e:
            if height == 0:
                raise
            report.truncated = f"level m = {m0 + height}: {e}"
            logger.warning("tower truncated: %s", report.truncated)
            height -= 1
    degree = top.working_degree
    report.working_degree = degree

    graphs: List[IsogenyGraph] = []
    for r in range(height):
        graphs.append(
            build_graph(params.at_level(params.N, m0 + r), settings, working_degree=degree, curves=curves)
        )
    graphs.append(top)
    for m in range(m0):
        below = build_graph(params.at_level(params.N, m), settings, working_degree=degree, curves=curves)
        report.below.append({"m": m, "components": _count_components(below.graph)})

    base = graphs[0]
    base_level = base.params.level
    for r, ig in enumerate(graphs):
        level = TowerLevel(
            m=m0 + r,
            r=r,
            vertices=ig.graph.number_of_nodes(),
            edges=ig.graph.number_of_edges(),
            components=_count_components(ig.graph),
        )
        down = projection_map(ig, base)
        if r > 0:
            cover = verify_covering(ig.graph, base.graph, down)
            step = verify_covering(ig.graph, graphs[r - 1].graph, projection_map(ig, graphs[r - 1]))
            level.cover, level.step_cover = cover.to_dict(), step.to_dict()
            if cover.degree != params.p**r:
                level.failures.append(f"cover over m0 has degree {cover.degree}, not {params.p ** r}")
            if step.degree != params.p:
                level.failures.append(f"step cover has degree {step.degree}, not {params.p}")
        _check_deck(ig, down, base_level, level)
        _check_fibers(ig, down, params.ell, c, level)
        report.levels.append(level)
        logger.info("level m=%d: %d vertices, deck %s", level.m, level.vertices, level.deck_count)

    kappas = run_ordered(
        lambda ig: _kappa(ig.graph), graphs, settings.jobs, settings.progress, desc="Kappa", unit="level"
    )
    for level, kappa in zip(report.levels, kappas):
        level.kappa = kappa
        level.ord_p = multiplicity(params.p, kappa)
    report.graphs = graphs
    report.fit = iwasawa_fit([level.ord_p for level in report.levels], params.p)
    return report


def level_graphs_dot(report: TowerReport) -> Dict[int, str]:
    """DOT text per tower level, keyed by m."""
    return {
        ig.params.m: graphcore.export_dot(ig.graph, name=f"G{ig.params.m}") for ig in report.graphs
    }
