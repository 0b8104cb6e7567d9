"""Short Weierstrass curves y^2 = x^3 + a x + b over F_{p^D}.

Points are immutable values; all sampling takes an explicit ``random.Random``.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field, replace
from math import gcd, isqrt
from typing import Dict, Iterator, List, Optional, Tuple

from sympy import factorint, multiplicity

from ..core import (
    BudgetExceededError,
    FieldTooSmallError,
    ValidationError,
    VerificationError,
    check_budget,
)
from .qfield import FieldCtx, FieldElement, FieldEmbedding

logger = logging.getLogger(__name__)

DEFAULT_TRACE_BUDGET = 1_000_000
DEFAULT_TORSION_BUDGET = 10_000
DEFAULT_RETRIES = 20


@dataclass(frozen=True)
class Point:
    x: Optional[FieldElement] = None
    y: Optional[FieldElement] = None
    order: Optional[int] = field(default=None, compare=False)

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @property
    def key(self) -> Tuple:
        if self.x is None or self.y is None:
            return (0,)
        return (1, self.x.key, self.y.key)

    def serialize(self) -> str:
        if self.x is None or self.y is None:
            return "inf"
        return f"{self.x.serialize()};{self.y.serialize()}"

    def with_order(self, order: int) -> "Point":
        return replace(self, order=order)


INFINITY = Point()


def scale_point(point: Point, u: FieldElement) -> Point:
    """Image of ``point`` under (x, y) -> (u^2 x, u^3 y)."""
    if point.x is None or point.y is None:
        return point
    u2 = u * u
    return Point(u2 * point.x, u2 * u * point.y, point.order)


@dataclass(frozen=True)
class Curve:
    a: FieldElement
    b: FieldElement
    trace: Optional[int] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.a.ctx != self.b.ctx:
            raise ValueError("curve coefficients live in different fields")
        if (4 * self.a**3 + 27 * self.b * self.b).is_zero():
            raise ValidationError(f"singular curve {self.describe()}")

    @property
    def ctx(self) -> FieldCtx:
        return self.a.ctx

    def describe(self) -> str:
        return f"y^2 = x^3 + ({self.a.serialize()}) x + ({self.b.serialize()})"

    def j_invariant(self) -> FieldElement:
        a3 = 4 * self.a**3
        return 1728 * a3 / (a3 + 27 * self.b * self.b)

    def has_j_1728(self) -> bool:
        return self.b.is_zero()

    def has_j_0(self) -> bool:
        return self.a.is_zero()

    def is_special(self) -> bool:
        return self.a.is_zero() or self.b.is_zero()

    def is_ordinary(self) -> bool:
        if self.trace is None:
            raise ValueError("trace not computed")
        return self.trace % self.ctx.p != 0

    def with_trace(self, trace: int) -> "Curve":
        return replace(self, trace=trace)

    def lift(self, embedding: FieldEmbedding) -> "Curve":
        return Curve(embedding(self.a), embedding(self.b), self.trace)

    def rhs(self, x: FieldElement) -> FieldElement:
        return x * x * x + self.a * x + self.b

    def contains(self, point: Point) -> bool:
        if point.x is None or point.y is None:
            return True
        return point.y * point.y == self.rhs(point.x)

    def point(self, x: FieldElement, y: FieldElement) -> Point:
        candidate = Point(x, y)
        if not self.contains(candidate):
            raise ValidationError(f"point ({x}, {y}) is not on {self.describe()}")
        return candidate

    def neg(self, point: Point) -> Point:
        if point.x is None or point.y is None:
            return point
        return Point(point.x, -point.y, point.order)

    def add(self, first: Point, second: Point) -> Point:
        if first.x is None or first.y is None:
            return second
        if second.x is None or second.y is None:
            return first
        if first.x.ctx != self.ctx or second.x.ctx != self.ctx:
            raise ValueError("points and curve live in different fields")
        if first.x == second.x:
            if first.y == -second.y:
                return INFINITY
            slope = (3 * first.x * first.x + self.a) / (2 * first.y)
        else:
            slope = (second.y - first.y) / (second.x - first.x)
        x3 = slope * slope - first.x - second.x
        y3 = slope * (first.x - x3) - first.y
        return Point(x3, y3)

    def sub(self, first: Point, second: Point) -> Point:
        return self.add(first, self.neg(second))

    def mul(self, n: int, point: Point) -> Point:
        if n < 0:
            return self.mul(-n, self.neg(point))
        result = INFINITY
        addend = point
        while n:
            if n & 1:
                result = self.add(result, addend)
            n >>= 1
            if n:
                addend = self.add(addend, addend)
        return result

    def order_of(self, point: Point, multiple: int) -> int:
        """Exact order of ``point`` given a multiple of it."""
        if not self.mul(multiple, point).is_infinity:
            raise ValueError(f"{multiple} is not a multiple of the point order")
        order = multiple
        for prime in factorint(multiple):
            while order % prime == 0 and self.mul(order // prime, point).is_infinity:
                order //= prime
        return order

    def random_point(self, rng: random.Random) -> Point:
        while True:
            x = self.ctx.random_element(rng)
            y = self.rhs(x).sqrt()
            if y is None:
                continue
            if rng.random() < 0.5:
                y = -y
            return Point(x, y)

    def points(self) -> Iterator[Point]:
        """Every point over the curve's own field, infinity first."""
        yield INFINITY
        for x in self.ctx.elements():
            y = self.rhs(x).sqrt()
            if y is None:
                continue
            yield Point(x, y)
            if not y.is_zero():
                yield Point(x, -y)


def curve_from_j(j: FieldElement) -> Curve:
    ctx = j.ctx
    if j.is_zero():
        return Curve(ctx.zero, ctx.one)
    if j == 1728:
        return Curve(ctx.one, ctx.zero)
    k = 1728 - j
    return Curve(3 * j * k, 2 * j * k * k)


def trace_of_frobenius(curve: Curve, budget: int = DEFAULT_TRACE_BUDGET) -> int:
    """
    Args:
        curve: curve over its base field F_q
        budget: largest q handled by enumeration

    Returns:
        t = q + 1 - #E(F_q)

    Raises:
        BudgetExceededError: if q exceeds the budget
    """
    ctx = curve.ctx
    q = ctx.order
    check_budget(q, budget, "base field for point counting")

    if ctx.degree == 1:
        p = ctx.p
        a, b = curve.a.coeffs[0], curve.b.coeffs[0]
        is_square = bytearray(p)
        for y in range(p):
            is_square[(y * y) % p] = 1
        count = 1
        for x in range(p):
            r = (x * x * x + a * x + b) % p
            count += 1 if r == 0 else 2 * is_square[r]
        return q + 1 - count

    half = (q - 1) // 2
    count = 1
    for x in ctx.elements():
        r = curve.rhs(x)
        if r.is_zero():
            count += 1
        elif r**half == ctx.one:
            count += 2
    return q + 1 - count


def trace_from_point_orders(
    curve: Curve, rng: random.Random, samples: int = 12
) -> int:
    """Trace recovered from orders of random points (Hasse interval search)."""
    q = curve.ctx.order
    width = isqrt(4 * q)
    candidates = list(range(q + 1 - width, q + 2 + width))
    for _ in range(samples):
        point = curve.random_point(rng)
        candidates = [n for n in candidates if curve.mul(n, point).is_infinity]
        if len(candidates) == 1:
            return q + 1 - candidates[0]
    raise VerificationError(
        f"point orders leave {len(candidates)} group orders for {curve.describe()}"
    )


def count_points_ext(t: int, q: int, e: int) -> int:
    """#E(F_{q^e}) from the trace t over F_q."""
    if e < 1:
        raise ValidationError(f"extension degree must be >= 1, got {e}")
    if t * t > 4 * q:
        raise ValidationError(f"trace {t} violates the Hasse bound for q={q}")
    s_prev, s_cur = 2, t
    for _ in range(e - 1):
        s_prev, s_cur = s_cur, t * s_cur - q * s_prev
    return q**e + 1 - s_cur


@dataclass(frozen=True)
class TorsionStructure:
    n: int
    group_order: int
    generators: Tuple[Point, Point]
    invariants: Tuple[int, int]
    rational: bool

    def exact_order_points(self, curve: Curve, order: int) -> List[Point]:
        """Points a*G1 + b*G2 of the given exact order, with orders attached."""
        big, small = self.invariants
        g1, g2 = self.generators
        found = []
        row = INFINITY
        for b in range(small):
            b_part = small // gcd(b, small)
            current = row
            for a in range(big):
                a_part = big // gcd(a, big)
                this_order = a_part * b_part // gcd(a_part, b_part)
                if this_order == order:
                    found.append(current.with_order(order))
                current = curve.add(current, g1)
            row = curve.add(row, g2)
        return found


def _cyclic_dlog(
    curve: Curve, target: Point, gen: Point, ell: int, exponent: int
) -> Optional[int]:
    # Pohlig-Hellman inside <gen> of order ell^exponent
    if exponent == 0:
        return 0 if target.is_infinity else None
    gamma = curve.mul(ell ** (exponent - 1), gen)
    x = 0
    for i in range(exponent):
        residual = curve.sub(target, curve.mul(x, gen))
        probe = curve.mul(ell ** (exponent - 1 - i), residual)
        digit = None
        step = INFINITY
        for d in range(ell):
            if step == probe:
                digit = d
                break
            step = curve.add(step, gamma)
        if digit is None:
            return None
        x += digit * ell**i
    return x if curve.mul(x, gen) == target else None


def _exponent_of(curve: Curve, point: Point, ell: int) -> int:
    e = 0
    while not point.is_infinity:
        point = curve.mul(ell, point)
        e += 1
    return e


def _sylow_basis(
    curve: Curve,
    ell: int,
    group_order: int,
    rng: random.Random,
    retries: int,
) -> Tuple[Point, int, Point, int]:
    v = multiplicity(ell, group_order)
    if v == 0:
        return INFINITY, 0, INFINITY, 0
    cofactor = group_order // ell**v
    g1, e1 = INFINITY, 0
    g2, e2 = INFINITY, 0
    for _ in range(retries * 10):
        if e1 + e2 == v:
            break
        sample = curve.mul(cofactor, curve.random_point(rng))
        e = _exponent_of(curve, sample, ell)
        if e > e1:
            g1, e1, g2, e2 = sample, e, INFINITY, 0
            continue
        # smallest k with ell^k * sample inside <g1>
        shifted = sample
        for k in range(e + 1):
            x = _cyclic_dlog(curve, shifted, g1, ell, e1)
            if x is not None:
                break
            shifted = curve.mul(ell, shifted)
        else:
            continue
        if k > e2 and x % ell**k == 0:
            g2 = curve.sub(sample, curve.mul(x // ell**k, g1))
            e2 = k
    else:
        if e1 + e2 != v:
            raise BudgetExceededError(
                f"sampling did not reach the {ell}-part of #E = {group_order}"
            )
    return g1, e1, g2, e2


def torsion_generators(
    curve: Curve,
    n: int,
    group_order: int,
    rng: random.Random,
    retries: int = DEFAULT_RETRIES,
    budget: int = DEFAULT_TORSION_BUDGET,
) -> TorsionStructure:
    """
    Args:
        curve: curve over the working field
        n: torsion level
        group_order: #E over the working field
        rng: sampling source
        retries: sampling budget multiplier
        budget: largest n handled

    Returns:
        Structure Z/A x Z/B of the rational n-torsion, B | A, with generators
    """
    if n < 1:
        raise ValidationError(f"torsion level must be positive, got {n}")
    check_budget(n, budget, "torsion level")
    p_char = curve.ctx.p
    g1_total, g2_total = INFINITY, INFINITY
    big, small = 1, 1
    rational = True
    for ell, a in sorted(factorint(n).items()):
        h1, e1, h2, e2 = _sylow_basis(curve, ell, group_order, rng, retries)
        # restrict to the ell^a-torsion
        t1 = curve.mul(ell ** max(0, e1 - a), h1)
        t2 = curve.mul(ell ** max(0, e2 - a), h2)
        f1, f2 = min(e1, a), min(e2, a)
        if f2 > f1:
            t1, t2, f1, f2 = t2, t1, f2, f1
        g1_total = curve.add(g1_total, t1)
        g2_total = curve.add(g2_total, t2)
        big *= ell**f1
        small *= ell**f2
        expected_small = 0 if ell == p_char else a
        if f1 != a or f2 != expected_small:
            rational = False
    logger.debug(
        "torsion n=%d over %s: Z/%d x Z/%d (rational=%s)",
        n,
        curve.ctx,
        big,
        small,
        rational,
    )
    return TorsionStructure(
        n=n,
        group_order=group_order,
        generators=(g1_total.with_order(big), g2_total.with_order(small)),
        invariants=(big, small),
        rational=rational,
    )


@dataclass(frozen=True)
class AutGroup:
    scalars: Tuple[FieldElement, ...]
    complete: bool


def aut_group(curve: Curve) -> AutGroup:
    """Automorphisms as scalings u with u^4 a = a and u^6 b = b."""
    ctx = curve.ctx
    if curve.has_j_1728():
        roots = ctx.roots_of_unity(4)
        return AutGroup(tuple(roots), len(roots) == 4)
    if curve.has_j_0():
        roots = ctx.roots_of_unity(6)
        return AutGroup(tuple(roots), len(roots) == 6)
    return AutGroup(tuple(sorted((ctx.one, -ctx.one), key=lambda z: z.key)), True)


def canonical_point(curve: Curve, point: Point, aut: Optional[AutGroup] = None) -> Point:
    """Least point of the Aut(E)-orbit of ``point`` in serial order."""
    if point.is_infinity:
        return point
    aut = aut or aut_group(curve)
    return min((scale_point(point, u) for u in aut.scalars), key=lambda q: q.key)


@dataclass(frozen=True, order=True)
class Vertex:
    j: str
    point: str

    def serialize(self) -> Dict[str, str]:
        return {"j": self.j, "point": self.point}


def canonical_pair(curve: Curve, point: Point, aut: Optional[AutGroup] = None) -> Vertex:
    canonical = canonical_point(curve, point, aut)
    return Vertex(curve.j_invariant().serialize(), canonical.serialize())


def _sqrt_all(value: FieldElement) -> List[FieldElement]:
    root = value.sqrt()
    if root is None:
        return []
    return [root, -root]


def _root_of_degree(value: FieldElement, n: int) -> Optional[FieldElement]:
    if n == 2:
        return value.sqrt()
    if n == 4:
        for half in _sqrt_all(value):
            root = half.sqrt()
            if root is not None:
                return root
        return None
    if n == 6:
        cube = value.nth_root(3)
        if cube is None:
            return None
        for zeta in value.ctx.roots_of_unity(3):
            root = (cube * zeta).sqrt()
            if root is not None:
                return root
        return None
    raise ValueError(f"unsupported root degree {n}")


def isomorphism_scalar(source: Curve, target: Curve) -> FieldElement:
    """
    Args:
        source: curve E
        target: curve E' with j(E') = j(E) over the same field

    Returns:
        u with a' = u^4 a and b' = u^6 b, so (x, y) -> (u^2 x, u^3 y) maps E to E'

    Raises:
        ValidationError: if the j-invariants differ
        FieldTooSmallError: if u does not lie in the field
    """
    if source.ctx != target.ctx:
        raise ValueError("curves live in different fields")
    if source.j_invariant() != target.j_invariant():
        raise ValidationError("curves with different j-invariants are not isomorphic")
    if source.has_j_1728():
        u = _root_of_degree(target.a / source.a, 4)
    elif source.has_j_0():
        u = _root_of_degree(target.b / source.b, 6)
    else:
        u = _root_of_degree((target.b * source.a) / (source.b * target.a), 2)
    if u is None:
        raise FieldTooSmallError(
            f"isomorphism scalar for j={source.j_invariant()} not in {source.ctx}"
        )
    return u


def are_equivalent(
    first: Tuple[Curve, Point], second: Tuple[Curve, Point]
) -> bool:
    curve1, point1 = first
    curve2, point2 = second
    if curve1.j_invariant() != curve2.j_invariant():
        return False
    if point1.order is not None and point2.order is not None:
        if point1.order != point2.order:
            return False
    u = isomorphism_scalar(curve1, curve2)
    moved = scale_point(point1, u)
    return canonical_point(curve2, moved) == canonical_point(curve2, point2)
