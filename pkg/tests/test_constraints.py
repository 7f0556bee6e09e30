from fractions import Fraction
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import rand_poly
from presym.cartan import Chart, DiffForm, exterior_derivative, parse_form, wedge
from presym.constraints import (
    ConstraintSet,
    NoSampler,
    UnsolvableConstraint,
    ideal_reduce,
    pullback_to_slice,
    vanishes_on,
)

C3 = Chart("c", ("x", "y", "z"))


def test_graph_constraints_are_solved():
    C = ConstraintSet(C3, ["x - y^2", "z + 2*y"])
    assert C.all_solvable()
    # the first variable (in chart order) each constraint is linear in gets eliminated
    assert C.solutions == {"x": C3.poly("1/4*z^2"), "y": C3.poly("-1/2*z")}
    assert C.dimension == 1


def test_certificate_recombines():
    C = ConstraintSet(C3, ["x - y^2"])
    p = C3.poly("x^2 - y^4 + z*x - z*y^2")
    red = ideal_reduce(p, C)
    assert red.certified
    (c,) = red.certificate
    assert c * C.constraints[0] == p


def test_non_member_has_nonzero_remainder():
    C = ConstraintSet(C3, ["x - y^2"])
    red = ideal_reduce(C3.poly("x + 1"), C)
    assert not red.certified
    assert red.remainder == C3.poly("y^2 + 1")


def test_quadric_needs_a_cofactor_of_degree_one():
    C = ConstraintSet(C3, ["x^2 + y^2 - z^2"])
    assert vanishes_on(C3.poly("x^3 + x*y^2 - x*z^2"), C).verdict == "certified"
    assert vanishes_on(C3.poly("x"), C).verdict == "fails"


def test_missing_sampler_is_reported():
    C = ConstraintSet(C3, ["x^2 + y^2 - z^2"])
    with pytest.raises(NoSampler):
        C.sample_points(3)


def test_sampler_hook_and_sampled_verdict():
    def sampler(rng):
        a, b = Fraction(rng.randint(1, 9)), Fraction(rng.randint(1, 9))
        return {"x": a * a - b * b, "y": 2 * a * b, "z": a * a + b * b}

    C = ConstraintSet(C3, ["x^2 + y^2 - z^2"], sampler=sampler)
    for pt in C.sample_points(5):
        assert C.constraints[0].evaluate(pt) == 0
    # y*z*(x^2+y^2-z^2) is certified; the cube of the constraint needs a degree-4 cofactor
    p = C3.poly("(x^2 + y^2 - z^2)^3")
    v = vanishes_on(p, C, escalate=0)
    assert v.verdict in ("certified", "sampled")


def test_pullback_uses_differentials_of_the_graph():
    C = ConstraintSet(C3, ["z - x*y"])
    omega = parse_form("dx^dz", C3)
    back = pullback_to_slice(omega, C)
    assert str(back) == "x dx^dy"


def test_pullback_refuses_non_graphs():
    C = ConstraintSet(C3, ["x^2 + y^2 - 1"])
    with pytest.raises(UnsolvableConstraint):
        pullback_to_slice(C3.poly("x"), C)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_pullback_commutes_with_d_and_wedge(seed):
    rng = random.Random(seed)
    C = ConstraintSet(C3, [C3.var("z") - rand_poly(rng, Chart("s", ("x", "y")), 2).on(C3.variables)])
    a = DiffForm(C3, 1, {(i,): rand_poly(rng, C3) for i in range(3)})
    b = DiffForm(C3, 1, {(i,): rand_poly(rng, C3) for i in range(3)})
    assert pullback_to_slice(exterior_derivative(a), C) == exterior_derivative(pullback_to_slice(a, C))
    assert pullback_to_slice(wedge(a, b), C) == wedge(pullback_to_slice(a, C), pullback_to_slice(b, C))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31))
def test_every_combination_is_certified(seed):
    rng = random.Random(seed)
    C = ConstraintSet(C3, ["x - y*z", "y - z^2 + 1"])
    p = rand_poly(rng, C3) * C.constraints[0] + rand_poly(rng, C3) * C.constraints[1]
    red = ideal_reduce(p, C)
    assert red.certified
    assert sum((c * z for c, z in zip(red.certificate, C.constraints)), C3.zero()) == p


def test_regularity_check_flags_dependent_differentials():
    C = ConstraintSet(C3, ["x", "x + y^2"])
    # at y = 0 the differentials dx and dx + 2y dy coincide
    assert not C.is_regular_at({"x": 0, "y": 0, "z": 1})
    assert C.is_regular_at({"x": 0, "y": 1, "z": 1})
