"""Abstract tectonic craters, the CM-order oracle and the bounded inverse search.

A tectonic crater with parameters (omega, s, t, c) is the quotient of the grid
Z^2 by the lattice spanned by (s, -c t) and (0, t omega); blue edges step the
first coordinate, green edges the second.
"""

import logging
from dataclasses import dataclass, field
from math import gcd, isqrt
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
from sympy import factorint, isprime, multiplicity, n_order, primerange, sqrt_mod
from sympy.ntheory.modular import crt

from ..core import (
    InconsistentStructureError,
    IsotowerError,
    ValidationError,
    check_budget,
    validate_positive,
)
from ..utilities import Settings, load_settings, run_ordered
from . import graphcore
from .crater import classify_split, color_edges, crater_components, extract_crater
from .volcano import BuildParams, build_graph, fundamental_discriminant, kronecker

logger = logging.getLogger(__name__)

MAX_TECTONIC_VERTICES = 1_000_000


@dataclass(frozen=True, order=True)
class TectonicParams:
    omega: int
    s: int
    t: int
    c: int

    @property
    def vertex_count(self) -> int:
        return self.omega * self.s * self.t

    def validate(self) -> "TectonicParams":
        for name in ("omega", "s", "t", "c"):
            validate_positive(getattr(self, name), name)
        if self.c > self.omega:
            raise ValidationError(f"c = {self.c} must lie in [1, omega = {self.omega}]")
        if gcd(self.c, self.omega) != 1:
            raise ValidationError(f"c = {self.c} must be coprime to omega = {self.omega}")
        check_budget(self.vertex_count, MAX_TECTONIC_VERTICES, "tectonic crater")
        return self

    def to_dict(self) -> Dict[str, int]:
        return {"omega": self.omega, "s": self.s, "t": self.t, "c": self.c}


def generate(params: TectonicParams) -> nx.MultiDiGraph:
    """
    Args:
        params: (omega, s, t, c) with gcd(c, omega) = 1

    Returns:
        The colored quotient graph with omega*s*t vertices; vertex ``x*t*omega + y``
        stands for the class of (x, y) with 0 <= x < s and 0 <= y < t*omega
    """
    params.validate()
    s, height = params.s, params.t * params.omega
    shift = params.c * params.t

    def reduce(x: int, y: int) -> int:
        wraps, x = divmod(x, s)
        return x * height + (y + wraps * shift) % height

    graph = graphcore.new_graph(tectonic=params.to_dict())
    for x in range(s):
        for y in range(height):
            graph.add_node(reduce(x, y), coords=[x, y])
    for x in range(s):
        for y in range(height):
            src = reduce(x, y)
            graphcore.add_edge(graph, src, reduce(x + 1, y), "blue")
            graphcore.add_edge(graph, src, reduce(x, y + 1), "green")
    if graph.number_of_nodes() != s * params.t * params.omega:
        raise InconsistentStructureError("lattice index differs from s*t*omega")
    return graph


def _successors(graph: nx.MultiDiGraph, color: str) -> Optional[Dict[int, int]]:
    step: Dict[int, int] = {}
    incoming: Dict[int, int] = {}
    for u, v, c in graph.edges(data="color"):
        if c != color:
            continue
        if u in step or v in incoming:
            return None
        step[u] = v
        incoming[v] = u
    if len(step) != graph.number_of_nodes() or len(incoming) != graph.number_of_nodes():
        return None
    return step


def recognize(graph: nx.MultiDiGraph) -> Optional[TectonicParams]:
    """
    Args:
        graph: colored directed multigraph

    Returns:
        The least parameters (omega, s, t, c) over all anchors when ``graph``
        is an abstract tectonic crater, otherwise None
    """
    if graph.number_of_nodes() == 0:
        return None
    if any(c not in ("blue", "green") for _, _, c in graph.edges(data="color")):
        return None
    blue = _successors(graph, "blue")
    green = _successors(graph, "green")
    if blue is None or green is None:
        return None
    if not nx.is_weakly_connected(graph):
        return None
    if any(blue[green[v]] != green[blue[v]] for v in graph.nodes):
        return None

    found = set()
    for anchor in sorted(graph.nodes):
        try:
            profile = classify_split(graph, anchor)
        except IsotowerError:
            return None
        assert profile.omega and profile.s and profile.t and profile.c
        found.add(TectonicParams(profile.omega, profile.s, profile.t, profile.c))
    best = min(found)
    if graph.number_of_nodes() != best.vertex_count:
        return None
    if graphcore.colored_digraph_iso(graph, generate(best)) is None:
        return None
    return best


@dataclass(frozen=True)
class CMOracleInput:
    d_K: int
    p: int
    x: Tuple[int, int]
    m: int = 1
    N: int = 1

    @property
    def modulus(self) -> int:
        return self.N * self.p**self.m

    @property
    def trace_omega(self) -> int:
        return 1 if self.d_K % 4 == 1 else 0

    @property
    def norm_omega(self) -> int:
        return (1 - self.d_K) // 4 if self.d_K % 4 == 1 else -self.d_K // 4

    def norm(self) -> int:
        a, b = self.x
        return a * a + a * b * self.trace_omega + b * b * self.norm_omega

    def validate(self) -> "CMOracleInput":
        if self.d_K >= 0 or fundamental_discriminant(self.d_K) != (self.d_K, 1):
            raise ValidationError(f"{self.d_K} is not a negative fundamental discriminant")
        if self.d_K in (-3, -4):
            raise ValidationError("d_K = -3 and -4 carry extra units; not handled by the oracle")
        if not isprime(self.p) or kronecker(self.d_K, self.p) != 1:
            raise ValidationError(f"p = {self.p} must be a prime split in Q(sqrt({self.d_K}))")
        validate_positive(self.m, "m")
        validate_positive(self.N, "N")
        if gcd(self.N, self.p) != 1:
            raise ValidationError("N must be coprime to p")
        if gcd(self.norm(), self.modulus) != 1:
            raise ValidationError(f"norm {self.norm()} of x is not coprime to N p^m")
        return self


@dataclass
class OracleProfile:
    h1: int
    h2: int
    s: int
    t: int
    c: int
    omega: int
    u_x: int
    u_xbar: int
    modulus: int

    @property
    def params(self) -> TectonicParams:
        return TectonicParams(self.omega, self.s, self.t, self.c)

    def to_dict(self) -> Dict[str, int]:
        return {
            "h1": self.h1,
            "h2": self.h2,
            "s": self.s,
            "t": self.t,
            "c": self.c,
            "omega": self.omega,
            "u_x": self.u_x,
            "u_xbar": self.u_xbar,
            "modulus": self.modulus,
        }


def _omega_root(trace: int, norm: int, prime: int, exponent: int) -> int:
    """Lift of omega modulo prime^exponent for the prime (prime, k + omega), k least."""
    modulus = prime**exponent
    base_roots = sorted(r for r in range(prime) if (r * r - trace * r + norm) % prime == 0)
    if not base_roots:
        raise ValidationError(f"{prime} does not split")
    k = min((-r) % prime for r in base_roots)
    if prime == 2:
        candidates = list(range((-k) % 2, modulus, 2))
    else:
        disc = trace * trace - 4 * norm
        half = pow(2, -1, modulus)
        roots = sqrt_mod(disc % modulus, modulus, all_roots=True) or []
        candidates = sorted((trace + root) * half % modulus for root in roots)
    for candidate in candidates:
        if (candidate * candidate - trace * candidate + norm) % modulus == 0 and (
            candidate + k
        ) % prime == 0:
            return candidate
    raise InconsistentStructureError(f"no lift of omega modulo {modulus}")


def _order_mod_sign(u: int, modulus: int) -> int:
    order = int(n_order(u, modulus))
    if order % 2 == 0 and pow(u, order // 2, modulus) == modulus - 1:
        return order // 2
    return order


def cm_order_profile(inp: CMOracleInput) -> OracleProfile:
    """
    Args:
        inp: fundamental discriminant, split prime p, level N p^m and a
            generator x = a + b*omega_K of the ideal above l

    Returns:
        Predicted (h1, h2, s, t, c, omega) of the crater component, read off
        the images of x and its conjugate in (Z/N p^m)^x / {+-1}
    """
    inp.validate()
    tr, nm = inp.trace_omega, inp.norm_omega
    residues = [_omega_root(tr, nm, inp.p, inp.m)]
    moduli = [inp.p**inp.m]
    for prime, exponent in sorted(factorint(inp.N).items()):
        if kronecker(inp.d_K, prime) != 1:
            raise ValidationError(f"factor {prime} of N does not split in Q(sqrt({inp.d_K}))")
        residues.append(_omega_root(tr, nm, prime, exponent))
        moduli.append(prime**exponent)
    modulus = inp.modulus
    rho = int(crt(moduli, residues)[0]) % modulus

    a, b = inp.x
    u_x = (a + b * rho) % modulus
    u_xbar = (a + b * (tr - rho)) % modulus
    h1 = _order_mod_sign(u_x, modulus)
    h2 = _order_mod_sign(u_xbar, modulus)

    green_index: Dict[int, int] = {}
    power = 1
    for j in range(h2):
        green_index.setdefault(power, j)
        green_index.setdefault((-power) % modulus, j)
        power = power * u_xbar % modulus
    power = 1
    s, j_s = h1, 0
    for sigma in range(1, h1 + 1):
        power = power * u_x % modulus
        if power in green_index:
            s, j_s = sigma, green_index[power]
            break
    t = s * h2 // h1
    omega = h1 // s
    if t * h1 != s * h2 or j_s % t:
        raise InconsistentStructureError(f"oracle meeting pattern broken for {inp}")
    c = (j_s // t) % omega or omega
    return OracleProfile(h1, h2, s, t, c, omega, u_x, u_xbar, modulus)


@dataclass(frozen=True)
class SearchBounds:
    max_p: int = 50
    max_l: int = 50
    max_N: int = 1
    max_dK: int = 50
    m: int = 1


@dataclass
class Witness:
    d_K: int
    p: int
    N: int
    ell: int
    x: Tuple[int, int]
    profile: OracleProfile
    confirmed: Optional[bool] = None
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dK": self.d_K,
            "p": self.p,
            "N": self.N,
            "l": self.ell,
            "x": list(self.x),
            "profile": self.profile.to_dict(),
            "confirmed": self.confirmed,
            "notes": self.notes,
        }


def fundamental_discriminants(limit: int) -> List[int]:
    """Negative fundamental discriminants d with |d| <= limit, excluding -3 and -4."""
    found = []
    for d in range(-5, -limit - 1, -1):
        if d % 4 not in (0, 1):
            continue
        if fundamental_discriminant(d) == (d, 1):
            found.append(d)
    return found


def prime_norm_generators(d_K: int, max_l: int) -> List[Tuple[int, int, int]]:
    """(l, a, b) with a + b*omega of prime norm l <= max_l, l unramified, b >= 1."""
    tr = 1 if d_K % 4 == 1 else 0
    nm = (1 - d_K) // 4 if tr else -d_K // 4
    found = []
    b = 1
    while b * b * (-d_K) <= 4 * max_l:
        bound = isqrt(max_l) + b + 1
        for a in range(-bound, bound + 1):
            norm = a * a + a * b * tr + b * b * nm
            if norm <= max_l and isprime(norm) and d_K % norm:
                found.append((norm, a, b))
        b += 1
    return sorted(found)


def _search_pair(
    d_K: int, p: int, target: TectonicParams, bounds: SearchBounds
) -> List[Witness]:
    witnesses = []
    generators = prime_norm_generators(d_K, bounds.max_l)
    for n_level in range(1, bounds.max_N + 1):
        if gcd(n_level, p) != 1:
            continue
        if any(kronecker(d_K, q) != 1 for q in factorint(n_level)):
            continue
        for ell, a, b in generators:
            if ell == p or gcd(ell, n_level) != 1:
                continue
            inp = CMOracleInput(d_K, p, (a, b), bounds.m, n_level)
            try:
                profile = cm_order_profile(inp)
            except ValidationError:
                continue
            if profile.params == target:
                witnesses.append(Witness(d_K, p, n_level, ell, (a, b), profile))
    return witnesses


def residue_degree_of_class(d_K: int, p: int, limit: int = 6) -> Optional[int]:
    """Least f <= limit with the prime above p raised to f principal."""
    tr = 1 if d_K % 4 == 1 else 0
    nm = (1 - d_K) // 4 if tr else -d_K // 4
    for f in range(1, limit + 1):
        target = p**f
        b = 0
        while b * b * (-d_K) <= 4 * target:
            bound = isqrt(target) + b + 1
            for a in range(-bound, bound + 1):
                if a * a + a * b * tr + b * b * nm == target and (a % p or b % p):
                    return f
            b += 1
    return None


def confirm_witness(
    witness: Witness, target: TectonicParams, settings: Optional[Settings] = None
) -> bool:
    """Build the isogeny graph for a witness and look for a matching crater."""
    settings = settings or load_settings()
    if witness.p <= 3:
        witness.notes.append("curve path needs p > 3")
        return False
    degree = residue_degree_of_class(witness.d_K, witness.p)
    if degree is None:
        witness.notes.append("class of the prime above p has large order")
        return False
    params = BuildParams(
        p=witness.p,
        ell=witness.ell,
        N=witness.N,
        m=multiplicity(witness.p, witness.profile.modulus),
        base_degree=degree,
        exclude_special_j=True,
        seed=settings.seed,
    )
    ig = build_graph(params, settings)
    reference = generate(target)
    for part in crater_components(extract_crater(ig)):
        info = ig.component_of(min(part.nodes))
        if info.kronecker != 1 or info.fundamental_disc != witness.d_K or info.depth:
            continue
        for swap in (False, True):
            colored = color_edges(ig, part, swap=swap)
            if recognize(colored) == target and graphcore.colored_digraph_iso(colored, reference):
                witness.notes.append(f"crater of component {info.index} matches")
                return True
    witness.notes.append("no crater component matched")
    return False


def inverse_search(
    target: TectonicParams,
    bounds: SearchBounds,
    confirm: bool = False,
    settings: Optional[Settings] = None,
) -> List[Witness]:
    """
    Args:
        target: crater parameters to realize
        bounds: search box for p, l, N and |d_K|
        confirm: build the isogeny graph of each witness and compare craters
        settings: jobs, progress and build budgets

    Returns:
        All witnesses in the box, ordered by (|d_K|, p, N, l, x); an empty
        list only means none exist within the bounds
    """
    target.validate()
    settings = settings or load_settings()
    pairs: List[Tuple[int, int]] = [
        (d_K, p)
        for d_K in fundamental_discriminants(bounds.max_dK)
        for p in primerange(3, bounds.max_p + 1)
        if kronecker(d_K, p) == 1
    ]
    logger.info("inverse search over %d (d_K, p) pairs", len(pairs))
    chunks = run_ordered(
        lambda pair: _search_pair(pair[0], pair[1], target, bounds),
        pairs,
        settings.jobs,
        settings.progress,
        desc="Search",
        unit="pair",
    )
    witnesses = sorted(
        (w for chunk in chunks for w in chunk),
        key=lambda w: (-w.d_K, w.p, w.N, w.ell, w.x),
    )
    if confirm:
        for witness in witnesses:
            try:
                witness.confirmed = confirm_witness(witness, target, settings)
            except IsotowerError as e:
                witness.confirmed = False
                witness.notes.append(f"graph path failed: {e}")
    logger.info("found %d witnesses", len(witnesses))
    return witnesses


def load_params(data: Dict[str, Any]) -> TectonicParams:
    try:
        return TectonicParams(
            int(data["omega"]), int(data["s"]), int(data["t"]), int(data["c"])
        ).validate()
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"malformed tectonic parameters: {e}")


def sweep(limit: int) -> Sequence[TectonicParams]:
    """Every valid parameter tuple with omega*s*t <= limit."""
    found = []
    for omega in range(1, limit + 1):
        for s in range(1, limit // omega + 1):
            for t in range(1, limit // (omega * s) + 1):
                for c in range(1, omega + 1):
                    if gcd(c, omega) == 1:
                        found.append(TectonicParams(omega, s, t, c))
    return found
