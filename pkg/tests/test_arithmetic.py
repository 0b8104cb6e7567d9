import random

import pytest

from isotower.arithmetic import (
    INFINITY,
    Curve,
    Point,
    are_equivalent,
    aut_group,
    canonical_point,
    count_points_ext,
    curve_from_j,
    enumerate_kernels,
    field_embedding,
    frobenius_eigenvalue,
    frobenius_roots,
    isomorphism_scalar,
    make_field,
    parse_element,
    scale_point,
    torsion_generators,
    trace_of_frobenius,
    velu_isogeny,
    verify_dual,
)
from isotower.core import BudgetExceededError, ValidationError


class TestField:
    def test_rejects_bad_characteristic(self):
        with pytest.raises(ValidationError):
            make_field(4, 1)
        with pytest.raises(ValidationError):
            make_field(3, 1)
        with pytest.raises(ValidationError):
            make_field(5, 0)

    def test_order_and_elements(self, f25):
        assert f25.order == 25
        assert len({z.key for z in f25.elements()}) == 25

    def test_from_index_digits(self, f25):
        assert f25.from_index(7).serialize() == "5^2:2,1"
        assert f25.from_index(3).serialize() == "5^2:3,0"

    def test_serial_round_trip(self, f25):
        z = f25.from_index(17)
        assert parse_element(z.serialize()) == z
        assert f25.parse(z.serialize()) == z
        with pytest.raises(ValidationError):
            f25.parse("7^2:1,1")
        with pytest.raises(ValidationError):
            parse_element("garbage")

    def test_field_axioms(self, f25):
        rng = random.Random(1)
        for _ in range(20):
            a, b = f25.random_element(rng), f25.random_element(rng)
            assert a + b - b == a
            if not b.is_zero():
                assert (a / b) * b == a
                assert b * b.inv() == f25.one

    def test_inverse_of_zero(self, f5):
        with pytest.raises(ZeroDivisionError):
            f5.zero.inv()

    def test_sqrt(self, f25):
        for z in f25.elements():
            square = z * z
            root = square.sqrt()
            assert root is not None and root * root == square
        assert f25.nonresidue(2).sqrt() is None

    def test_cube_roots(self, f25):
        for z in f25.elements():
            cube = z**3
            root = cube.nth_root(3)
            assert root is not None and root**3 == cube

    def test_frobenius_fixes_prime_field(self, f25):
        assert f25.from_int(3).frobenius() == f25.from_int(3)
        assert f25.gen.frobenius() != f25.gen

    def test_roots_of_unity(self, f5, f25):
        assert len(f5.roots_of_unity(4)) == 4
        assert len(f5.roots_of_unity(3)) == 1
        assert len(f25.roots_of_unity(3)) == 3
        assert all(w**6 == f25.one for w in f25.roots_of_unity(6))

    def test_embedding(self, f25):
        f625 = make_field(5, 4)
        embed = field_embedding(f25, f625)
        a, b = f25.from_index(11), f25.from_index(19)
        assert embed(a * b) == embed(a) * embed(b)
        assert embed(a + b) == embed(a) + embed(b)
        with pytest.raises(ValidationError):
            field_embedding(f625, f25)


class TestCurve:
    def test_models_have_requested_j(self, f25):
        for j in f25.elements():
            assert curve_from_j(j).j_invariant() == j

    def test_trace_of_j1728(self, f5):
        curve = curve_from_j(f5.from_int(1728))
        assert curve.has_j_1728()
        assert trace_of_frobenius(curve) == 2

    def test_trace_budget(self, f25):
        with pytest.raises(BudgetExceededError):
            trace_of_frobenius(curve_from_j(f25.one), budget=10)

    def test_count_points_ext(self):
        assert count_points_ext(2, 5, 1) == 4
        assert count_points_ext(2, 5, 2) == 32
        with pytest.raises(ValidationError):
            count_points_ext(7, 5, 1)

    def test_group_law(self, f25):
        curve = curve_from_j(f25.from_index(8))
        rng = random.Random(3)
        p1, p2 = curve.random_point(rng), curve.random_point(rng)
        assert curve.contains(curve.add(p1, p2))
        assert curve.add(p1, curve.neg(p1)) == INFINITY
        assert curve.add(curve.add(p1, p2), p2) == curve.add(p1, curve.mul(2, p2))
        order = count_points_ext(trace_of_frobenius(curve), 25, 1)
        assert curve.mul(order, p1).is_infinity

    def test_singular_curve_rejected(self, f5):
        with pytest.raises(ValidationError):
            Curve(f5.zero, f5.zero)

    def test_isomorphism_scalar(self, f5):
        curve = Curve(f5.one, f5.from_int(3))
        twisted = Curve(f5.from_int(2**4), f5.from_int(3 * 2**6))
        u = isomorphism_scalar(curve, twisted)
        for point in curve.points():
            assert twisted.contains(scale_point(point, u))

    def test_canonical_point_is_orbit_invariant(self, f25):
        curve = curve_from_j(f25.from_int(1728))
        aut = aut_group(curve)
        assert aut.complete and len(aut.scalars) == 4
        point = curve.random_point(random.Random(5))
        for u in aut.scalars:
            assert canonical_point(curve, scale_point(point, u), aut) == canonical_point(curve, point, aut)
        assert are_equivalent((curve, point), (curve, curve.neg(point)))

    def test_torsion_structure(self, f25):
        curve = curve_from_j(f25.from_int(1728))
        order = count_points_ext(2, 5, 2)
        torsion = torsion_generators(curve, 2, order, random.Random(0))
        assert torsion.invariants == (2, 2)
        assert torsion.rational
        assert len(torsion.exact_order_points(curve, 2)) == 3


class TestIsogeny:
    @pytest.fixture
    def e1728(self, f5):
        return Curve(f5.one, f5.zero)

    def test_velu_codomains(self, f5, e1728):
        loop = velu_isogeny(e1728, Point(f5.zero, f5.zero), 2)
        assert loop.codomain.j_invariant() == f5.from_int(1728)
        down = velu_isogeny(e1728, Point(f5.from_int(2), f5.zero), 2)
        assert down.codomain == Curve(f5.one, f5.from_int(3))
        assert down.codomain.j_invariant() == f5.one

    def test_kernel_checks(self, f5, e1728):
        with pytest.raises(ValidationError):
            velu_isogeny(e1728, INFINITY, 2)

    def test_enumerate_kernels(self, f5, e1728):
        basis = (Point(f5.from_int(2), f5.zero), Point(f5.from_int(3), f5.zero))
        kernels = enumerate_kernels(e1728, 2, basis)
        assert [k.serialize() for k in kernels] == [
            "5^1:0;5^1:0",
            "5^1:2;5^1:0",
            "5^1:3;5^1:0",
        ]
        with pytest.raises(ValidationError):
            enumerate_kernels(e1728, 2, basis[:1])

    def test_images_land_on_codomain(self, f25):
        curve = Curve(f25.one, f25.zero)
        step = velu_isogeny(curve, Point(f25.from_int(2), f25.zero), 2)
        rng = random.Random(7)
        for _ in range(10):
            assert step.codomain.contains(step.evaluate(curve.random_point(rng)))
        assert step.evaluate(step.kernel_gen).is_infinity

    def test_dual_exists(self, f25):
        curve = Curve(f25.one, f25.zero)
        basis = (Point(f25.from_int(2), f25.zero), Point(f25.from_int(3), f25.zero))
        step = velu_isogeny(curve, basis[0], 2, basis)
        assert verify_dual(step)

    def test_frobenius_data(self, f25):
        curve = Curve(f25.one, f25.zero)
        assert frobenius_roots(2, 5, 2) == (1,)
        assert frobenius_eigenvalue(curve, Point(f25.zero, f25.zero), 2, 5) == 1
