"""Arithmetic in prime fields F_p and their extensions F_{p^D}.

Elements are coefficient tuples in the basis 1, x, ..., x^(D-1) modulo a fixed
monic irreducible polynomial. Contexts are cached, so two calls to
``make_field`` with the same arguments return the same object and elements
built from either can be mixed freely.
"""

from __future__ import annotations

import functools
import logging
import random
from dataclasses import dataclass, field
from math import gcd
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple, Union

from sympy import Poly, factorint, isprime
from sympy.abc import x as _X

from ..core import InconsistentStructureError, ValidationError

logger = logging.getLogger(__name__)

MAX_DEGREE = 200
_ROOT_SCREEN_LIMIT = 97

Coeffs = Tuple[int, ...]


def _trim(poly: List[int]) -> List[int]:
    while poly and poly[-1] == 0:
        poly.pop()
    return poly


def _poly_divmod(a: List[int], b: List[int], p: int) -> Tuple[List[int], List[int]]:
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [], a
    inv_lead = pow(b[-1], -1, p)
    quotient = [0] * (len(a) - len(b) + 1)
    rem = list(a)
    for shift in range(len(a) - len(b), -1, -1):
        coef = (rem[shift + len(b) - 1] * inv_lead) % p
        quotient[shift] = coef
        if coef:
            for i, bc in enumerate(b):
                rem[shift + i] = (rem[shift + i] - coef * bc) % p
    return _trim(quotient), _trim(rem[: len(b) - 1])


def _poly_mul(a: List[int], b: List[int], p: int) -> List[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ac in enumerate(a):
        if ac:
            for j, bc in enumerate(b):
                out[i + j] += ac * bc
    return _trim([c % p for c in out])


def _poly_sub(a: List[int], b: List[int], p: int) -> List[int]:
    size = max(len(a), len(b))
    out = [
        ((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
        for i in range(size)
    ]
    return _trim(out)


def _has_root_mod_p(coeffs: Sequence[int], p: int) -> bool:
    for a in range(p):
        acc = 0
        for c in reversed(coeffs):
            acc = (acc * a + c) % p
        if acc == 0:
            return True
    return False


def _is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """``coeffs`` is low-first and monic."""
    degree = len(coeffs) - 1
    if degree == 1:
        return True
    if coeffs[0] == 0:
        return False
    if p <= _ROOT_SCREEN_LIMIT and _has_root_mod_p(coeffs, p):
        return False
    if degree <= 3 and p <= _ROOT_SCREEN_LIMIT:
        return True
    return bool(Poly(list(reversed(coeffs)), _X, modulus=p).is_irreducible)


def _find_modulus(p: int, degree: int) -> Coeffs:
    # Candidates ordered by the integer sum c_i p^i with the constant term as
    # the fastest-varying digit.
    if degree == 1:
        return (0, 1)
    for index in range(p**degree):
        coeffs = []
        rest = index
        for _ in range(degree):
            rest, digit = divmod(rest, p)
            coeffs.append(digit)
        candidate = tuple(coeffs) + (1,)
        if _is_irreducible(candidate, p):
            return candidate
    raise InconsistentStructureError(
        f"no irreducible polynomial of degree {degree} over F_{p}"
    )


@dataclass(frozen=True)
class FieldCtx:
    p: int
    degree: int
    modulus: Coeffs
    _cache: Dict[Any, Any] = field(
        default_factory=dict, compare=False, hash=False, repr=False
    )

    @functools.cached_property
    def order(self) -> int:
        return int(self.p**self.degree)

    @functools.cached_property
    def _reduction(self) -> Tuple[Tuple[int, int], ...]:
        return tuple((j, c) for j, c in enumerate(self.modulus[:-1]) if c)

    @functools.cached_property
    def zero(self) -> "FieldElement":
        return FieldElement(self, (0,) * self.degree)

    @functools.cached_property
    def one(self) -> "FieldElement":
        return self.from_int(1)

    @functools.cached_property
    def gen(self) -> "FieldElement":
        if self.degree == 1:
            return self.zero
        return self.element([0, 1])

    def element(self, coeffs: Sequence[int]) -> "FieldElement":
        coeffs = list(coeffs)
        if len(coeffs) > self.degree:
            raise ValueError(
                f"expected at most {self.degree} coefficients, got {len(coeffs)}"
            )
        coeffs += [0] * (self.degree - len(coeffs))
        return FieldElement(self, tuple(c % self.p for c in coeffs))

    def from_int(self, value: int) -> "FieldElement":
        return FieldElement(self, (value % self.p,) + (0,) * (self.degree - 1))

    def from_index(self, index: int) -> "FieldElement":
        coeffs = []
        for _ in range(self.degree):
            index, digit = divmod(index, self.p)
            coeffs.append(digit)
        return FieldElement(self, tuple(coeffs))

    def elements(self) -> Iterator["FieldElement"]:
        for index in range(self.order):
            yield self.from_index(index)

    def random_element(self, rng: random.Random) -> "FieldElement":
        return FieldElement(
            self, tuple(rng.randrange(self.p) for _ in range(self.degree))
        )

    def parse(self, text: str) -> "FieldElement":
        header, _, body = text.partition(":")
        if header != f"{self.p}^{self.degree}":
            raise ValidationError(
                f"element {text!r} does not belong to F_{self.p}^{self.degree}"
            )
        return self.element([int(c) for c in body.split(",")])

    def nonresidue(self, r: int) -> "FieldElement":
        """Least element (by index) that is not an r-th power."""
        key = ("nonresidue", r)
        if key not in self._cache:
            exponent = (self.order - 1) // r
            for index in range(2, self.order):
                z = self.from_index(index)
                if z ** exponent != self.one:
                    self._cache[key] = z
                    break
            else:
                raise InconsistentStructureError(f"no {r}-th power non-residue")
        return self._cache[key]

    def roots_of_unity(self, n: int) -> List["FieldElement"]:
        """All n-th roots of unity in the field, sorted by serial order."""
        key = ("roots_of_unity", n)
        if key in self._cache:
            return list(self._cache[key])
        d = gcd(n, self.order - 1)
        roots = [self.one]
        if d > 1:
            primes = list(factorint(d))
            for index in range(2, self.order):
                w = self.from_index(index) ** ((self.order - 1) // d)
                if all(w ** (d // f) != self.one for f in primes):
                    roots = [w**k for k in range(d)]
                    break
        roots.sort(key=lambda z: z.key)
        self._cache[key] = tuple(roots)
        return roots

    def __str__(self) -> str:
        return f"F_{self.p}^{self.degree}"


class FieldElement:
    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: FieldCtx, coeffs: Coeffs):
        self.ctx = ctx
        self.coeffs = coeffs

    def _coerce(self, other: Union["FieldElement", int]) -> Coeffs:
        if isinstance(other, FieldElement):
            if other.ctx is not self.ctx and other.ctx != self.ctx:
                raise ValueError(f"mixed fields {self.ctx} and {other.ctx}")
            return other.coeffs
        if isinstance(other, int):
            return self.ctx.from_int(other).coeffs
        return NotImplemented  # type: ignore[return-value]

    def _mul_coeffs(self, a: Coeffs, b: Coeffs) -> Coeffs:
        ctx = self.ctx
        p, degree = ctx.p, ctx.degree
        if degree == 1:
            return ((a[0] * b[0]) % p,)
        prod = [0] * (2 * degree - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        prod[i + j] += ai * bj
        reduction = ctx._reduction
        for k in range(2 * degree - 2, degree - 1, -1):
            c = prod[k] % p
            if c:
                base = k - degree
                for j, mj in reduction:
                    prod[base + j] -= c * mj
        return tuple(v % p for v in prod[:degree])

    def __add__(self, other: Union["FieldElement", int]) -> "FieldElement":
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FieldElement(self.ctx, tuple((x + y) % p for x, y in zip(self.coeffs, b)))

    __radd__ = __add__

    def __sub__(self, other: Union["FieldElement", int]) -> "FieldElement":
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        p = self.ctx.p
        return FieldElement(self.ctx, tuple((x - y) % p for x, y in zip(self.coeffs, b)))

    def __rsub__(self, other: int) -> "FieldElement":
        return (-self) + other

    def __neg__(self) -> "FieldElement":
        p = self.ctx.p
        return FieldElement(self.ctx, tuple((-x) % p for x in self.coeffs))

    def __mul__(self, other: Union["FieldElement", int]) -> "FieldElement":
        b = self._coerce(other)
        if b is NotImplemented:
            return NotImplemented
        return FieldElement(self.ctx, self._mul_coeffs(self.coeffs, b))

    __rmul__ = __mul__

    def __truediv__(self, other: Union["FieldElement", int]) -> "FieldElement":
        if isinstance(other, int):
            other = self.ctx.from_int(other)
        return self * other.inv()

    def __rtruediv__(self, other: int) -> "FieldElement":
        return self.ctx.from_int(other) * self.inv()

    def __pow__(self, exponent: int) -> "FieldElement":
        if exponent < 0:
            return self.inv() ** (-exponent)
        result = self.ctx.one.coeffs
        base = self.coeffs
        while exponent:
            if exponent & 1:
                result = self._mul_coeffs(result, base)
            exponent >>= 1
            if exponent:
                base = self._mul_coeffs(base, base)
        return FieldElement(self.ctx, result)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FieldElement):
            return self.coeffs == other.coeffs and (
                self.ctx is other.ctx or self.ctx == other.ctx
            )
        if isinstance(other, int):
            return self.coeffs == self.ctx.from_int(other).coeffs
        return NotImplemented

    def __ne__(self, other: object) -> bool:
        result = self.__eq__(other)
        if result is NotImplemented:
            return result
        return not result

    def __hash__(self) -> int:
        return hash((self.ctx.p, self.ctx.degree, self.coeffs))

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __repr__(self) -> str:
        return f"FieldElement({self.serialize()})"

    __str__ = __repr__

    @property
    def key(self) -> Coeffs:
        return self.coeffs

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def in_prime_field(self) -> bool:
        return not any(self.coeffs[1:])

    def serialize(self) -> str:
        body = ",".join(str(c) for c in self.coeffs)
        return f"{self.ctx.p}^{self.ctx.degree}:{body}"

    def inv(self) -> "FieldElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a finite field")
        ctx = self.ctx
        p = ctx.p
        if ctx.degree == 1:
            return FieldElement(ctx, (pow(self.coeffs[0], -1, p),))
        # extended Euclid; invariant s_i * self == r_i modulo the modulus
        r0, r1 = list(ctx.modulus), _trim(list(self.coeffs))
        s0: List[int] = []
        s1: List[int] = [1]
        while r1:
            q, rem = _poly_divmod(r0, r1, p)
            r0, r1 = r1, rem
            s0, s1 = s1, _poly_sub(s0, _poly_mul(q, s1, p), p)
        if len(r0) != 1:
            raise InconsistentStructureError("field modulus is not irreducible")
        scale = pow(r0[0], -1, p)
        return ctx.element([(c * scale) % p for c in s0])

    def frobenius(self) -> "FieldElement":
        return self ** self.ctx.p

    def is_square(self) -> bool:
        if self.is_zero():
            return True
        return self ** ((self.ctx.order - 1) // 2) == self.ctx.one

    def sqrt(self) -> Optional["FieldElement"]:
        """A square root, or ``None`` for a non-residue."""
        if self.is_zero():
            return self
        order = self.ctx.order
        if order % 4 == 3:
            root = self ** ((order + 1) // 4)
            return root if root * root == self else None
        return self.nth_root(2)

    def nth_root(self, r: int) -> Optional["FieldElement"]:
        """An r-th root for prime r, or ``None`` when none exists."""
        ctx = self.ctx
        order = ctx.order
        if self.is_zero():
            return self
        if (order - 1) % r:
            return self ** pow(r, -1, order - 1)
        if self ** ((order - 1) // r) != ctx.one:
            return None

        e, s = 0, order - 1
        while s % r == 0:
            s //= r
            e += 1
        g = ctx.nonresidue(r) ** s
        d = pow(r, -1, s) if s > 1 else 0
        a0 = self**d
        h = self * a0 ** (-r)

        # discrete log of h to base g, one base-r digit at a time
        gamma = g ** (r ** (e - 1))
        k = 0
        for i in range(e):
            probe = (g ** (-k) * h) ** (r ** (e - 1 - i))
            digit = next(
                (dd for dd in range(r) if gamma**dd == probe),
                None,
            )
            if digit is None:
                raise InconsistentStructureError("root extraction lost the subgroup")
            k += digit * r**i
        if k % r:
            raise InconsistentStructureError("root extraction hit a non-residue")
        return a0 * g ** (k // r)

    def to_int(self) -> int:
        if not self.in_prime_field():
            raise ValueError(f"{self.serialize()} is not in the prime field")
        return self.coeffs[0]


@functools.lru_cache(maxsize=None)
def make_field(p: int, degree: int) -> FieldCtx:
    """
    Args:
        p: characteristic, a prime greater than 3
        degree: extension degree, 1 <= degree <= 200

    Returns:
        Field context with the least irreducible modulus in the fixed order

    Raises:
        ValidationError: if p is not a prime > 3 or degree is out of range
    """
    if not isinstance(p, int) or p <= 3 or not isprime(p):
        raise ValidationError(f"p must be a prime greater than 3, got {p}")
    if not isinstance(degree, int) or not 1 <= degree <= MAX_DEGREE:
        raise ValidationError(f"degree must be in [1, {MAX_DEGREE}], got {degree}")
    modulus = _find_modulus(p, degree)
    logger.debug("F_%d^%d modulus %s", p, degree, modulus)
    return FieldCtx(p, degree, modulus)


def parse_element(text: str) -> FieldElement:
    header, sep, _ = text.partition(":")
    p_text, caret, d_text = header.partition("^")
    if not sep or not caret:
        raise ValidationError(f"malformed field element {text!r}")
    try:
        ctx = make_field(int(p_text), int(d_text))
    except ValueError:
        raise ValidationError(f"malformed field element {text!r}")
    return ctx.parse(text)


# Polynomials with coefficients in a field context, low-first lists.
FPoly = List[FieldElement]


def _fpoly_trim(poly: FPoly) -> FPoly:
    while poly and poly[-1].is_zero():
        poly.pop()
    return poly


def _fpoly_divmod(a: FPoly, b: FPoly) -> Tuple[FPoly, FPoly]:
    a = _fpoly_trim(list(a))
    b = _fpoly_trim(list(b))
    if len(a) < len(b):
        return [], a
    ctx = b[-1].ctx
    inv_lead = b[-1].inv()
    quotient = [ctx.zero] * (len(a) - len(b) + 1)
    rem = list(a)
    for shift in range(len(a) - len(b), -1, -1):
        coef = rem[shift + len(b) - 1] * inv_lead
        quotient[shift] = coef
        if not coef.is_zero():
            for i, bc in enumerate(b):
                rem[shift + i] = rem[shift + i] - coef * bc
    return _fpoly_trim(quotient), _fpoly_trim(rem[: len(b) - 1])


def _fpoly_mulmod(a: FPoly, b: FPoly, f: FPoly) -> FPoly:
    if not a or not b:
        return []
    ctx = a[0].ctx
    out = [ctx.zero] * (len(a) + len(b) - 1)
    for i, ac in enumerate(a):
        for j, bc in enumerate(b):
            out[i + j] = out[i + j] + ac * bc
    return _fpoly_divmod(out, f)[1]


def _fpoly_powmod(base: FPoly, exponent: int, f: FPoly) -> FPoly:
    result: FPoly = [base[0].ctx.one]
    base = _fpoly_divmod(base, f)[1]
    while exponent:
        if exponent & 1:
            result = _fpoly_mulmod(result, base, f)
        exponent >>= 1
        if exponent:
            base = _fpoly_mulmod(base, base, f)
    return result


def _fpoly_gcd(a: FPoly, b: FPoly) -> FPoly:
    a, b = _fpoly_trim(list(a)), _fpoly_trim(list(b))
    while b:
        a, b = b, _fpoly_divmod(a, b)[1]
    if not a:
        return a
    lead = a[-1].inv()
    return [c * lead for c in a]


def split_roots(poly: FPoly, rng: random.Random) -> List[FieldElement]:
    """Roots of a squarefree polynomial that splits into linear factors."""
    poly = _fpoly_trim(list(poly))
    if len(poly) <= 1:
        return []
    if len(poly) == 2:
        return [-(poly[0] / poly[1])]
    ctx = poly[0].ctx
    half = (ctx.order - 1) // 2
    while True:
        delta = ctx.random_element(rng)
        h = _fpoly_powmod([delta, ctx.one], half, poly)
        if not h:
            continue
        h = [h[0] - 1] + h[1:]
        g = _fpoly_gcd(poly, h)
        if 1 < len(g) < len(poly):
            cofactor = _fpoly_divmod(poly, g)[0]
            roots = split_roots(g, rng) + split_roots(cofactor, rng)
            return sorted(roots, key=lambda z: z.key)


@dataclass(frozen=True)
class FieldEmbedding:
    base: FieldCtx
    work: FieldCtx
    image_of_gen: FieldElement

    def __call__(self, value: FieldElement) -> FieldElement:
        if value.ctx != self.base:
            raise ValueError(f"{value.serialize()} is not in {self.base}")
        if self.base.degree == 1:
            return self.work.from_int(value.coeffs[0])
        result = self.work.zero
        power = self.work.one
        for c in value.coeffs:
            if c:
                result = result + power * c
            power = power * self.image_of_gen
        return result


@functools.lru_cache(maxsize=None)
def field_embedding(base: FieldCtx, work: FieldCtx) -> FieldEmbedding:
    """
    Args:
        base: field F_q
        work: field F_{q^D} of the same characteristic

    Returns:
        Embedding sending the base generator to the least root of the base
        modulus inside the working field
    """
    if base.p != work.p or work.degree % base.degree:
        raise ValidationError(f"{base} does not embed into {work}")
    if base.degree == 1:
        return FieldEmbedding(base, work, work.zero)
    poly = [work.from_int(c) for c in base.modulus]
    roots = split_roots(poly, random.Random(0))
    if not roots:
        raise InconsistentStructureError(f"base modulus has no root in {work}")
    return FieldEmbedding(base, work, roots[0])
