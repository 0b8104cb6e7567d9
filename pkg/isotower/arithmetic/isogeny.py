"""Degree-l isogenies given by a rational kernel point (Velu's formulas)."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from ..core import FieldTooSmallError, ValidationError
from .ecurve import (
    INFINITY,
    Curve,
    Point,
    aut_group,
    isomorphism_scalar,
    scale_point,
)
from .qfield import FieldElement

logger = logging.getLogger(__name__)


def _subgroup(curve: Curve, gen: Point, ell: int) -> List[Point]:
    points = []
    current = gen
    for _ in range(ell - 1):
        points.append(current)
        current = curve.add(current, gen)
    return points


def canonical_generator(curve: Curve, gen: Point, ell: int) -> Point:
    """Least nonzero point of the subgroup generated by ``gen``."""
    return min(_subgroup(curve, gen, ell), key=lambda q: q.key).with_order(ell)


@dataclass(frozen=True)
class IsogenyStep:
    domain: Curve
    kernel_gen: Point
    codomain: Curve
    degree: int
    # (x_Q, v_Q, u_Q) for Q running over the 2-torsion and one of each +-Q pair
    terms: Tuple[Tuple[FieldElement, FieldElement, FieldElement], ...] = field(
        repr=False
    )
    l_basis: Tuple[Point, ...] = field(default=(), compare=False, repr=False)

    @property
    def kernel_serial(self) -> str:
        return self.kernel_gen.serialize()

    def evaluate(self, point: Point) -> Point:
        if point.x is None or point.y is None:
            return INFINITY
        x, y = point.x, point.y
        for x_q, _, _ in self.terms:
            if x == x_q:
                return INFINITY
        new_x = x
        y_factor = self.domain.ctx.one
        for x_q, v_q, u_q in self.terms:
            inv = (x - x_q).inv()
            inv2 = inv * inv
            new_x = new_x + v_q * inv + u_q * inv2
            y_factor = y_factor - (v_q * inv2 + 2 * u_q * inv2 * inv)
        return Point(new_x, y * y_factor, point.order)

    def serialize(self, domain_id: str, codomain_id: str) -> Tuple[str, str, str]:
        return (domain_id, self.kernel_serial, codomain_id)


def velu_isogeny(
    curve: Curve, kernel_gen: Point, ell: int, l_basis: Sequence[Point] = ()
) -> IsogenyStep:
    """
    Args:
        curve: domain curve
        kernel_gen: point of exact prime order ell
        ell: isogeny degree
        l_basis: optional generators of E[ell], kept for verify_dual

    Returns:
        The isogeny with kernel <kernel_gen>

    Raises:
        ValidationError: if kernel_gen does not have order ell
    """
    if kernel_gen.x is None or not curve.mul(ell, kernel_gen).is_infinity:
        raise ValidationError(f"kernel generator does not have order {ell}")
    if ell == curve.ctx.p:
        raise ValidationError("isogeny degree must differ from the characteristic")

    kernel = _subgroup(curve, kernel_gen, ell)
    if ell == 2:
        representatives = kernel
    else:
        representatives = kernel[: (ell - 1) // 2]

    a, b = curve.a, curve.b
    v_total = curve.ctx.zero
    w_total = curve.ctx.zero
    terms = []
    for q in representatives:
        assert q.x is not None and q.y is not None
        g_x = 3 * q.x * q.x + a
        g_y = -2 * q.y
        v_q = g_x if q.y.is_zero() else 2 * g_x
        u_q = g_y * g_y
        v_total = v_total + v_q
        w_total = w_total + u_q + q.x * v_q
        terms.append((q.x, v_q, u_q))

    codomain = Curve(a - 5 * v_total, b - 7 * w_total)
    return IsogenyStep(
        domain=curve,
        kernel_gen=canonical_generator(curve, kernel_gen, ell),
        codomain=codomain,
        degree=ell,
        terms=tuple(terms),
        l_basis=tuple(l_basis),
    )


def enumerate_kernels(curve: Curve, ell: int, l_basis: Sequence[Point]) -> List[Point]:
    """
    Args:
        curve: curve whose ell-torsion is rational
        ell: prime degree
        l_basis: two independent points of order ell

    Returns:
        ell + 1 canonical kernel generators, sorted by serial order
    """
    if len(l_basis) != 2 or any(p.is_infinity for p in l_basis):
        raise ValidationError(f"E[{ell}] is not rational over {curve.ctx}")
    g1, g2 = l_basis
    gens = [g2]
    current = g1
    for _ in range(ell):
        gens.append(current)
        current = curve.add(current, g2)
    kernels = {canonical_generator(curve, g, ell) for g in gens}
    if len(kernels) != ell + 1:
        raise ValidationError(f"E[{ell}] basis is degenerate")
    return sorted(kernels, key=lambda q: q.key)


def verify_dual(
    step: IsogenyStep,
    l_basis: Optional[Sequence[Point]] = None,
    rng: Optional[random.Random] = None,
    samples: int = 4,
) -> bool:
    """True when some isogeny out of the codomain composes with ``step`` to [l]."""
    basis = tuple(l_basis) if l_basis is not None else step.l_basis
    if not basis:
        raise ValidationError("verify_dual needs generators of E[l]")
    rng = rng or random.Random(0)
    curve, ell = step.domain, step.degree
    try:
        outside = next(
            (t for t in basis if not step.evaluate(t).is_infinity),
            None,
        )
        if outside is None:
            return False
        dual = velu_isogeny(step.codomain, step.evaluate(outside), ell)
        back = dual.codomain
        u0 = isomorphism_scalar(back, curve)
        scalars = [u0 * zeta for zeta in aut_group(curve).scalars]

        probes = []
        for _ in range(samples * 16):
            if len(probes) == samples:
                break
            probe = curve.random_point(rng)
            if not curve.mul(ell, probe).is_infinity:
                probes.append(probe)
        if not probes:
            # every rational point is l-torsion; [l] kills them all
            return all(
                dual.evaluate(step.evaluate(t)).is_infinity for t in basis
            )
        images = [dual.evaluate(step.evaluate(probe)) for probe in probes]
        targets = [curve.mul(ell, probe) for probe in probes]
        for u in scalars:
            if all(scale_point(im, u) == tg for im, tg in zip(images, targets)):
                return True
        return False
    except (ValidationError, FieldTooSmallError, ZeroDivisionError, ValueError):
        return False


def frobenius_roots(t: int, q: int, ell: int) -> Tuple[int, ...]:
    """Roots of X^2 - t X + q modulo ell."""
    return tuple(x for x in range(ell) if (x * x - t * x + q) % ell == 0)


def frobenius_eigenvalue(
    curve: Curve, kernel_gen: Point, ell: int, q: int
) -> Optional[int]:
    """
    Args:
        curve: curve over the working field, defined over F_q
        kernel_gen: generator of a kernel of order ell
        ell: kernel order
        q: size of the base field

    Returns:
        lambda with pi(G) = lambda * G, or None when the kernel is not pi-stable
    """
    if kernel_gen.x is None or kernel_gen.y is None:
        raise ValidationError("kernel generator must be an affine point")
    image = Point(kernel_gen.x**q, kernel_gen.y**q)
    current = INFINITY
    for k in range(ell):
        if current == image:
            return k
        current = curve.add(current, kernel_gen)
    return None
