"""Craters: the level-zero part of an isogeny graph, colored and classified.

In the split case every crater vertex has one blue and one green outgoing
horizontal edge. Blue marks the kernels on which Frobenius acts by the smaller
root of X^2 - tX + q modulo l; the dual of a blue edge is green, which fixes
colors where the eigenvalues cannot tell the two primes apart.
"""

import logging
from dataclasses import dataclass, field
from math import gcd, lcm
from typing import Any, Dict, List, Optional, Tuple

import networkx as nx

from ..arithmetic import frobenius_roots
from ..core import InconsistentStructureError, ValidationError
from . import graphcore
from .volcano import IsogenyGraph

logger = logging.getLogger(__name__)

EdgeKey = Tuple[int, int, int]

CENSUS_CLASSES = ("central", "blue_primary", "green_primary", "secondary")


@dataclass
class PrincipalCase:
    kind: str
    u: Optional[int] = None
    r: Optional[int] = None
    t1: Optional[int] = None
    t2: Optional[int] = None
    long_color: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "case1":
            data.update(u=self.u, r=self.r, long_color=self.long_color)
        elif self.kind == "case2":
            data.update(u=self.u, r=self.r, t1=self.t1, t2=self.t2)
        return data


@dataclass
class CraterProfile:
    kind: str
    vertices: List[int]
    anchor: int
    component: Optional[int] = None
    length: Optional[int] = None
    h1: Optional[int] = None
    h2: Optional[int] = None
    s: Optional[int] = None
    t: Optional[int] = None
    c: Optional[int] = None
    omega: Optional[int] = None
    census: Dict[str, int] = field(default_factory=dict)
    classes: Dict[int, str] = field(default_factory=dict, repr=False)
    principal_case: PrincipalCase = field(default_factory=lambda: PrincipalCase("not-applicable"))

    @property
    def size(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "kind": self.kind,
            "component": self.component,
            "anchor": self.anchor,
            "size": self.size,
        }
        if self.kind == "ramified-cycle":
            data["length"] = self.length
        if self.kind == "split":
            data.update(
                h1=self.h1, h2=self.h2, s=self.s, t=self.t, c=self.c, omega=self.omega,
                census=dict(self.census),
            )
        data["principal_case"] = self.principal_case.to_dict()
        return data


def extract_crater(ig: IsogenyGraph) -> nx.MultiDiGraph:
    """Induced subgraph on level-zero vertices with their horizontal edges."""
    graph = ig.graph
    level0 = [v for v in graph.nodes if graph.nodes[v]["level"] == 0]
    crater = graph.subgraph(level0).copy()
    crater.graph.update(graph.graph)
    return crater


def _successor(graph: nx.MultiDiGraph, v: int, color: str) -> int:
    targets = [w for _, w, c in graph.out_edges(v, data="color") if c == color]
    if len(targets) != 1:
        raise InconsistentStructureError(
            f"vertex {v} has {len(targets)} outgoing {color} edges, expected 1"
        )
    return targets[0]


def _cycle(graph: nx.MultiDiGraph, start: int, color: str) -> List[int]:
    path = [start]
    current = _successor(graph, start, color)
    while current != start:
        if len(path) > graph.number_of_nodes():
            raise InconsistentStructureError(f"{color} walk from {start} never closes")
        path.append(current)
        current = _successor(graph, current, color)
    return path


def _normalized_eigenvalue(ig: IsogenyGraph, src: int, kernel: str, trace: int) -> Optional[int]:
    data = ig.curves[ig.vertices[src].j]
    ell = ig.params.ell
    for step, value in zip(data.steps, data.eigenvalues):
        if step.kernel_serial != kernel or value is None:
            continue
        if data.trace == trace:
            return value
        if data.trace == -trace:
            return (-value) % ell
    return None


def _parity_classes(constraints: nx.Graph) -> List[Dict[EdgeKey, int]]:
    classes = []
    for part in nx.connected_components(constraints):
        root = min(part)
        parity = {root: 0}
        for u, v in nx.bfs_edges(constraints, root):
            parity[v] = parity[u] ^ 1
        for u, v in constraints.subgraph(part).edges():
            if parity[u] == parity[v]:
                raise InconsistentStructureError("crater edges admit no consistent coloring")
        classes.append(parity)
    return sorted(classes, key=lambda c: min(c))


def color_edges(
    ig: IsogenyGraph, crater: nx.MultiDiGraph, swap: bool = False
) -> nx.MultiDiGraph:
    """
    Args:
        ig: the graph the crater came from
        crater: one weakly connected split crater component
        swap: color with the opposite convention (blue for the larger root)

    Returns:
        Copy of ``crater`` with every edge colored blue or green

    Raises:
        ValidationError: if l does not split for this component
        InconsistentStructureError: if a vertex lacks two horizontal edges
            or the eigenvalues contradict the dual-edge structure
    """
    nodes = sorted(crater.nodes)
    if not nodes:
        return crater.copy()
    info = ig.component_of(nodes[0])
    if info.kronecker != 1:
        raise ValidationError(f"component {info.index} is not split (kronecker {info.kronecker})")
    ell = ig.params.ell

    colored = crater.copy()
    edges: List[EdgeKey] = sorted(colored.edges(keys=True))
    for v in nodes:
        if colored.out_degree(v) != 2 or colored.in_degree(v) != 2:
            raise InconsistentStructureError(
                f"split crater vertex {v} has {colored.out_degree(v)} out and "
                f"{colored.in_degree(v)} in horizontal edges"
            )

    constraints = nx.Graph()
    constraints.add_nodes_from(edges)
    for v in nodes:
        outgoing = sorted(colored.out_edges(v, keys=True))
        incoming = sorted(colored.in_edges(v, keys=True))
        constraints.add_edge(outgoing[0], outgoing[1])
        constraints.add_edge(incoming[0], incoming[1])
    for u, v, k in edges:
        multiple = ig.curve_of(u).mul(ell, ig.point_of(u))
        back = ig.lookup(ig.vertices[u].j, multiple)
        duals = [e for e in colored.out_edges(v, keys=True) if e[1] == back]
        if len(duals) == 1 and duals[0] != (u, v, k):
            constraints.add_edge((u, v, k), duals[0])

    roots = frobenius_roots(info.trace, ig.base.order, ell)
    votes: Dict[EdgeKey, int] = {}
    if len(roots) == 2:
        blue_root = roots[1] if swap else roots[0]
        for u, v, k in edges:
            value = _normalized_eigenvalue(ig, u, colored.edges[u, v, k]["kernel"], info.trace)
            if value is not None:
                votes[(u, v, k)] = 0 if value == blue_root else 1
    else:
        logger.debug(
            "component %d: Frobenius is scalar on E[%d]; colors follow dual edges only",
            info.index,
            ell,
        )

    for parity in _parity_classes(constraints):
        flips = {votes[e] ^ parity[e] for e in parity if e in votes}
        if len(flips) > 1:
            raise InconsistentStructureError(
                f"Frobenius eigenvalues disagree with the dual structure in component {info.index}"
            )
        voted = bool(flips)
        flip = flips.pop() if voted else int(swap)
        if not voted and len(roots) == 2 and len(parity) > 1:
            logger.warning("component %d: %d edges colored without eigenvalue data", info.index, len(parity))
        for edge, bit in parity.items():
            colored.edges[edge]["color"] = "blue" if bit ^ flip == 0 else "green"
    return colored


def _census_sets(
    graph: nx.MultiDiGraph, s: int, blue: List[int], green: List[int]
) -> Dict[int, str]:
    central = {blue[i] for i in range(0, len(blue), s)}
    classes = {v: "secondary" for v in graph.nodes}
    for v in blue:
        classes[v] = "blue_primary"
    for v in green:
        if classes[v] == "blue_primary" and v not in central:
            raise InconsistentStructureError(f"vertex {v} is both blue and green primary")
        classes[v] = "green_primary"
    for v in central:
        classes[v] = "central"
    return classes


def classify_split(graph: nx.MultiDiGraph, anchor: int) -> CraterProfile:
    """Walk parameters and census of a colored split crater, seen from ``anchor``."""
    blue = _cycle(graph, anchor, "blue")
    green = _cycle(graph, anchor, "green")
    h1, h2 = len(blue), len(green)
    green_index = {v: i for i, v in enumerate(green)}
    s = next(i for i in range(1, h1 + 1) if blue[i % h1] in green_index)
    j_s = green_index[blue[s % h1]]
    if (s * h2) % h1:
        raise InconsistentStructureError(f"s*h2/h1 is not integral (s={s}, h1={h1}, h2={h2})")
    t = s * h2 // h1
    omega = h1 // s
    if h1 % s or h2 % t or h2 // t != omega or j_s % t:
        raise InconsistentStructureError(
            f"meeting pattern broken: h1={h1}, h2={h2}, s={s}, t={t}, green index {j_s}"
        )
    c = (j_s // t) % omega or omega
    if gcd(c, omega) != 1:
        raise InconsistentStructureError(f"c={c} is not coprime to omega={omega}")

    classes = _census_sets(graph, s, blue, green)
    census = {name: 0 for name in CENSUS_CLASSES}
    for name in classes.values():
        census[name] += 1
    expected = {
        "central": omega,
        "blue_primary": h1 * (s - 1) // s,
        "green_primary": h2 * (t - 1) // t,
        "secondary": h1 * (s - 1) * (t - 1) // s,
    }
    if census != expected or graph.number_of_nodes() != s * t * omega:
        raise InconsistentStructureError(
            f"census {census} of {graph.number_of_nodes()} vertices differs from {expected}"
        )
    return CraterProfile(
        kind="split",
        vertices=sorted(graph.nodes),
        anchor=anchor,
        h1=h1,
        h2=h2,
        s=s,
        t=t,
        c=c,
        omega=omega,
        census=census,
        classes=classes,
    )


def classify_component(
    graph: nx.MultiDiGraph, anchor: Optional[int] = None, component: Optional[int] = None
) -> CraterProfile:
    """
    Args:
        graph: one crater component; split components must carry colors
        anchor: vertex v1 the walks start from (least vertex by default)
        component: parent component index to record

    Returns:
        The profile with kind, walk parameters, census and principal case
    """
    nodes = sorted(graph.nodes)
    if not nodes:
        raise ValidationError("cannot classify an empty crater")
    anchor = nodes[0] if anchor is None else anchor
    if anchor not in graph:
        raise ValidationError(f"anchor {anchor} is not a crater vertex")

    colors = {c for _, _, c in graph.edges(data="color")}
    if colors & {"blue", "green"}:
        profile = classify_split(graph, anchor)
        profile.principal_case = principal_case(graph, profile)
    elif graph.number_of_edges() == 0:
        if len(nodes) != 1:
            raise InconsistentStructureError(f"edgeless crater with {len(nodes)} vertices")
        profile = CraterProfile(kind="inert-isolated", vertices=nodes, anchor=anchor)
    else:
        for v in nodes:
            if graph.out_degree(v) != 1 or graph.in_degree(v) != 1:
                raise InconsistentStructureError(f"ramified crater vertex {v} is not on a cycle")
        if len(nodes) == 1:
            profile = CraterProfile(kind="ramified-loop", vertices=nodes, anchor=anchor, length=1)
        else:
            profile = CraterProfile(
                kind="ramified-cycle", vertices=nodes, anchor=anchor, length=len(nodes)
            )
    profile.component = component
    return profile


def _walk_labels(
    graph: nx.MultiDiGraph, anchor: int, u: int, steps: Dict[str, int]
) -> Optional[Dict[int, int]]:
    labels = {anchor: 0}
    queue = [anchor]
    while queue:
        v = queue.pop()
        for color, step in steps.items():
            w = _successor(graph, v, color)
            label = (labels[v] + step) % u
            if w in labels:
                if labels[w] != label:
                    return None
            else:
                labels[w] = label
                queue.append(w)
    if len(labels) != u or len(set(labels.values())) != u:
        return None
    return labels


def principal_case(graph: nx.MultiDiGraph, profile: CraterProfile) -> PrincipalCase:
    """Recognize the two cyclic shapes a crater with principal ideals above l takes."""
    if profile.kind != "split" or any(u == v for u, v in graph.edges()):
        return PrincipalCase("not-applicable")
    assert profile.h1 is not None and profile.h2 is not None
    h1, h2, u = profile.h1, profile.h2, profile.size
    anchor = profile.anchor

    if max(h1, h2) % min(h1, h2) == 0 and u == max(h1, h2):
        long_color, short_color = ("blue", "green") if h1 >= h2 else ("green", "blue")
        cycle = _cycle(graph, anchor, long_color)
        position = {v: i for i, v in enumerate(cycle)}
        r = position[_successor(graph, anchor, short_color)] or u
        if all(
            position[_successor(graph, v, short_color)] == (i + r) % u
            for i, v in enumerate(cycle)
        ):
            return PrincipalCase("case1", u=u, r=r, long_color=long_color)
        return PrincipalCase("not-applicable")

    if u == lcm(h1, h2):
        t1, t2 = u // h1, u // h2
        for r in range(1, u + 1):
            if gcd(r, u) != 1:
                continue
            if _walk_labels(graph, anchor, u, {"blue": t1, "green": r * t2}) is not None:
                return PrincipalCase("case2", u=u, r=r, t1=t1, t2=t2)
    return PrincipalCase("not-applicable")


def mark_census(graph: nx.MultiDiGraph, profile: CraterProfile) -> nx.MultiDiGraph:
    """Copy of ``graph`` with a ``census`` attribute on each classified vertex."""
    marked = graph.copy()
    for v, name in profile.classes.items():
        marked.nodes[v]["census"] = name
    return marked


def crater_components(crater: nx.MultiDiGraph) -> List[nx.MultiDiGraph]:
    return [crater.subgraph(part).copy() for part in graphcore.components(crater)]


def profile_craters(
    ig: IsogenyGraph, swap: bool = False
) -> List[Tuple[CraterProfile, nx.MultiDiGraph]]:
    """Classify every crater component of ``ig`` (colored graphs returned alongside)."""
    results = []
    for part in crater_components(extract_crater(ig)):
        lead = min(part.nodes)
        info = ig.component_of(lead)
        if info.kronecker == 1:
            part = color_edges(ig, part, swap=swap)
        profile = classify_component(part, component=info.index)
        results.append((profile, mark_census(part, profile)))
    logger.info("classified %d crater components", len(results))
    return results
