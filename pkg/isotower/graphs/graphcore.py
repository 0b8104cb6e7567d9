"""Directed multigraphs with colored edges: components, spanning trees,
colored isomorphism and JSON/DOT export.

Graphs are ``networkx.MultiDiGraph`` instances with integer node ids. Edges
carry ``color`` (``blue``, ``green`` or ``none``) and ``kernel`` attributes;
graph-level metadata lives in ``G.graph``.
"""

import json
import logging
from collections import Counter, deque
from typing import Any, Dict, Hashable, Iterable, List, Optional, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import (
    MultiDiGraphMatcher,
    categorical_multiedge_match,
)
from sympy import ZZ
from sympy.polys.matrices import DomainMatrix

from ..core import ValidationError

logger = logging.getLogger(__name__)

COLORS = ("blue", "green", "none")
METADATA_KEYS = ("p", "l", "N", "m", "base_degree", "working_degree")
VERTEX_KEYS = ("id", "j", "point", "level", "component")
EDGE_KEYS = ("src", "dst", "color", "kernel")

_DOT_COLORS = {"blue": "blue", "green": "green", "none": "gray"}
_CENSUS_STYLES = {
    "central": 'style=filled, fillcolor="orange"',
    "blue_primary": 'color="blue"',
    "green_primary": 'color="green"',
    "secondary": "shape=box",
}


def new_graph(**metadata: Any) -> nx.MultiDiGraph:
    graph = nx.MultiDiGraph()
    for key in METADATA_KEYS:
        graph.graph[key] = metadata.pop(key, None)
    graph.graph.update(metadata)
    return graph


def add_edge(
    graph: nx.MultiDiGraph,
    src: int,
    dst: int,
    color: str = "none",
    kernel: Optional[str] = None,
    **attrs: Any,
) -> int:
    if color not in COLORS:
        raise ValidationError(f"edge color must be one of {COLORS}, got {color!r}")
    if src not in graph or dst not in graph:
        raise ValidationError(f"edge {src} -> {dst} references a missing vertex")
    return int(graph.add_edge(src, dst, color=color, kernel=kernel, **attrs))


def components(graph: nx.MultiDiGraph) -> List[List[Hashable]]:
    """Weak components, each sorted, ordered by least vertex."""
    parts = [sorted(c) for c in nx.weakly_connected_components(graph)]
    return sorted(parts, key=lambda c: c[0])


def undirected_multigraph(graph: nx.MultiDiGraph, drop_loops: bool = True) -> nx.MultiGraph:
    """One undirected edge per directed edge record."""
    shadow = nx.MultiGraph()
    shadow.add_nodes_from(graph.nodes)
    for u, v in graph.edges():
        if drop_loops and u == v:
            continue
        shadow.add_edge(u, v)
    return shadow


def spanning_tree_count(graph: nx.MultiDiGraph) -> int:
    """
    Args:
        graph: connected graph; direction is ignored and loops dropped

    Returns:
        Number of spanning trees of the undirected shadow, computed as an
        exact Laplacian cofactor

    Raises:
        ValidationError: if the graph is empty or disconnected
    """
    nodes = sorted(graph.nodes)
    if not nodes:
        raise ValidationError("spanning trees of an empty graph are undefined")
    shadow = undirected_multigraph(graph)
    if not nx.is_connected(shadow):
        raise ValidationError("spanning_tree_count needs a connected graph")
    if len(nodes) == 1:
        return 1

    index = {node: i for i, node in enumerate(nodes)}
    size = len(nodes)
    laplacian = [[0] * size for _ in range(size)]
    for u, v in shadow.edges():
        i, j = index[u], index[v]
        laplacian[i][i] += 1
        laplacian[j][j] += 1
        laplacian[i][j] -= 1
        laplacian[j][i] -= 1

    minor = [[ZZ(value) for value in row[1:]] for row in laplacian[1:]]
    det = DomainMatrix(minor, (size - 1, size - 1), ZZ).det()
    return int(det)


def _colored_degrees_are_unit(graph: nx.MultiDiGraph) -> bool:
    out_count: Counter = Counter()
    in_count: Counter = Counter()
    for u, v, color in graph.edges(data="color"):
        out_count[(u, color)] += 1
        in_count[(v, color)] += 1
    return all(c <= 1 for c in out_count.values()) and all(
        c <= 1 for c in in_count.values()
    )


def _edge_signature(graph: nx.MultiDiGraph) -> Counter:
    return Counter(color for _, _, color in graph.edges(data="color"))


def _walk_mapping(
    graph: nx.MultiDiGraph,
    other: nx.MultiDiGraph,
    anchor: Hashable,
    image: Hashable,
    used: set,
) -> Optional[Dict[Hashable, Hashable]]:
    mapping = {anchor: image}
    taken = set(used) | {image}
    queue = deque([anchor])
    while queue:
        node = queue.popleft()
        target = mapping[node]
        moves: List[Tuple[Hashable, Hashable]] = []
        for _, succ, color in graph.out_edges(node, data="color"):
            match = [w for _, w, c in other.out_edges(target, data="color") if c == color]
            if len(match) != 1:
                return None
            moves.append((succ, match[0]))
        for pred, _, color in graph.in_edges(node, data="color"):
            match = [w for w, _, c in other.in_edges(target, data="color") if c == color]
            if len(match) != 1:
                return None
            moves.append((pred, match[0]))
        for mine, theirs in moves:
            if mine in mapping:
                if mapping[mine] != theirs:
                    return None
                continue
            if theirs in taken:
                return None
            mapping[mine] = theirs
            taken.add(theirs)
            queue.append(mine)
    return mapping


def _edges_preserved(
    graph: nx.MultiDiGraph, other: nx.MultiDiGraph, mapping: Dict[Hashable, Hashable]
) -> bool:
    moved = Counter(
        (mapping[u], mapping[v], c) for u, v, c in graph.edges(data="color")
    )
    return moved == Counter(other.edges(data="color"))


def colored_digraph_iso(
    graph: nx.MultiDiGraph, other: nx.MultiDiGraph, fallback_limit: int = 64
) -> Optional[Dict[Hashable, Hashable]]:
    """
    With at most one in- and one out-edge of each color per vertex, a map is
    fixed by the image of one vertex per component. Every image is tried, and
    a component is accepted only when its edges land exactly on the edges of
    the matched component. Other graphs go to ``MultiDiGraphMatcher``.

    Args:
        graph: first colored multigraph
        other: second colored multigraph
        fallback_limit: largest vertex count for the general matcher

    Returns:
        A color- and direction-preserving vertex bijection, or None

    Raises:
        ValidationError: if the graphs leave the unit-degree regime and are too
            large for the general matcher
    """
    if graph.number_of_nodes() != other.number_of_nodes():
        return None
    if _edge_signature(graph) != _edge_signature(other):
        return None
    if graph.number_of_nodes() == 0:
        return {}

    if _colored_degrees_are_unit(graph) and _colored_degrees_are_unit(other):
        mapping: Dict[Hashable, Hashable] = {}
        their_parts = components(other)
        free = list(range(len(their_parts)))
        for part in components(graph):
            anchor = part[0]
            found = None
            for slot in free:
                if len(their_parts[slot]) != len(part):
                    continue
                theirs = other.subgraph(their_parts[slot])
                for image in their_parts[slot]:
                    candidate = _walk_mapping(graph, other, anchor, image, set())
                    if (
                        candidate is not None
                        and len(candidate) == len(part)
                        and _edges_preserved(graph.subgraph(part), theirs, candidate)
                    ):
                        found = (slot, candidate)
                        break
                if found:
                    break
            if found is None:
                return None
            free.remove(found[0])
            mapping.update(found[1])
        return mapping if _edges_preserved(graph, other, mapping) else None

    if graph.number_of_nodes() > fallback_limit:
        raise ValidationError(
            f"general isomorphism search limited to {fallback_limit} vertices"
        )
    matcher = MultiDiGraphMatcher(
        graph, other, edge_match=categorical_multiedge_match("color", "none")
    )
    if matcher.is_isomorphic():
        return dict(matcher.mapping)
    return None


def _edge_sort_key(record: Dict[str, Any]) -> Tuple:
    return (
        record["src"],
        record["dst"],
        record["color"],
        record.get("kernel") or "",
        json.dumps(record, sort_keys=True),
    )


def to_document(graph: nx.MultiDiGraph) -> Dict[str, Any]:
    document: Dict[str, Any] = {key: graph.graph.get(key) for key in METADATA_KEYS}
    extra = {k: v for k, v in graph.graph.items() if k not in METADATA_KEYS}
    if extra:
        document["meta"] = {k: extra[k] for k in sorted(extra)}

    vertices = []
    for node in sorted(graph.nodes):
        attrs = graph.nodes[node]
        record: Dict[str, Any] = {"id": node}
        for key in VERTEX_KEYS[1:]:
            record[key] = attrs.get(key)
        for key in sorted(attrs):
            if key not in VERTEX_KEYS:
                record[key] = attrs[key]
        vertices.append(record)

    edges = []
    for u, v, attrs in graph.edges(data=True):
        record = {"src": u, "dst": v, "color": attrs.get("color", "none"), "kernel": attrs.get("kernel")}
        for key in sorted(attrs):
            if key not in EDGE_KEYS:
                record[key] = attrs[key]
        edges.append(record)
    edges.sort(key=_edge_sort_key)

    document["vertices"] = vertices
    document["edges"] = edges
    return document


def from_document(document: Dict[str, Any]) -> nx.MultiDiGraph:
    try:
        metadata = {key: document.get(key) for key in METADATA_KEYS}
        metadata.update(document.get("meta", {}))
        graph = new_graph(**metadata)
        for record in document["vertices"]:
            attrs = {k: v for k, v in record.items() if k != "id"}
            graph.add_node(record["id"], **attrs)
        for record in document["edges"]:
            attrs = {k: v for k, v in record.items() if k not in ("src", "dst")}
            add_edge(graph, record["src"], record["dst"], **attrs)
    except (KeyError, TypeError) as e:
        raise ValidationError(f"malformed graph document: {e}")
    return graph


def export_json(graph: nx.MultiDiGraph) -> str:
    return json.dumps(to_document(graph), indent=2) + "\n"


def load_json(text: str) -> nx.MultiDiGraph:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"invalid JSON graph: {e}")
    return from_document(document)


def _node_label(node: Hashable, attrs: Dict[str, Any]) -> str:
    if "label" in attrs:
        return str(attrs["label"])
    parts = [str(node)]
    if attrs.get("j") is not None:
        parts.append(f"j={attrs['j'].split(':', 1)[-1]}")
    if attrs.get("level") is not None:
        parts.append(f"lvl {attrs['level']}")
    return "\\n".join(parts)


def export_dot(graph: nx.MultiDiGraph, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    for node in sorted(graph.nodes):
        attrs = graph.nodes[node]
        style = [f"label={json.dumps(_node_label(node, attrs))}"]
        census = attrs.get("census")
        if census in _CENSUS_STYLES:
            style.append(_CENSUS_STYLES[census])
        lines.append(f"  {node} [{', '.join(style)}];")
    records = to_document(graph)["edges"]
    for record in records:
        attrs = [f"color={_DOT_COLORS.get(record['color'], 'gray')}"]
        if record.get("style"):
            attrs.append(f"style={record['style']}")
        lines.append(f"  {record['src']} -> {record['dst']} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export(graph: nx.MultiDiGraph, fmt: str = "json") -> str:
    if fmt == "json":
        return export_json(graph)
    if fmt == "dot":
        return export_dot(graph)
    raise ValidationError(f"unknown export format {fmt!r}; use 'json' or 'dot'")


def relabel_sorted(graph: nx.MultiDiGraph, order: Iterable[Hashable]) -> nx.MultiDiGraph:
    """Copy of ``graph`` with vertices renumbered 0..n-1 in the given order."""
    mapping = {node: i for i, node in enumerate(order)}
    return nx.relabel_nodes(graph, mapping, copy=True)
