from fractions import Fraction
import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from helpers import chart_of, rand_field, rand_form, rand_poly
from oracles import d_oracle, lie_oracle
from presym.cartan import (
    Chart,
    DiffForm,
    NotClosed,
    VectorField,
    exterior_derivative,
    integrate_closed_one_form,
    interior,
    lie_bracket,
    lie_derivative,
    parse_form,
    wedge,
)
from presym.symexpr import ChartMismatch, ParseError

seeds = st.integers(0, 2**31)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(0, 3))
def test_exterior_derivative_matches_coordinate_formula(seed, k):
    rng = random.Random(seed)
    chart = chart_of(4)
    a = rand_form(rng, chart, k)
    assert exterior_derivative(a).components == d_oracle(a)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(0, 3))
def test_lie_derivative_matches_coordinate_formula(seed, k):
    rng = random.Random(seed)
    chart = chart_of(4)
    a = rand_form(rng, chart, k)
    X = rand_field(rng, chart, 1)
    assert lie_derivative(X, a).components == lie_oracle(X, a)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 2), st.integers(0, 2))
def test_graded_leibniz_and_commutativity(seed, p, q):
    rng = random.Random(seed)
    chart = chart_of(5)
    a, b = rand_form(rng, chart, p), rand_form(rng, chart, q)
    sign = -1 if p % 2 else 1
    assert exterior_derivative(wedge(a, b)) == (
        wedge(exterior_derivative(a), b) + wedge(a, exterior_derivative(b)) * sign
    )
    assert wedge(a, b) == wedge(b, a) * (-1 if p * q % 2 else 1)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 2), st.integers(1, 2))
def test_interior_is_an_antiderivation(seed, p, q):
    rng = random.Random(seed)
    chart = chart_of(5)
    a, b = rand_form(rng, chart, p), rand_form(rng, chart, q)
    X = rand_field(rng, chart, 1)
    sign = -1 if p % 2 else 1
    assert interior(X, wedge(a, b)) == wedge(interior(X, a), b) + wedge(a, interior(X, b)) * sign


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_bracket_acts_as_commutator(seed):
    rng = random.Random(seed)
    chart = chart_of(3)
    X, Y = rand_field(rng, chart, 2), rand_field(rng, chart, 2)
    f = rand_poly(rng, chart, 3)
    assert lie_bracket(X, Y)(f) == X(Y(f)) - Y(X(f))
    assert lie_bracket(X, Y) == -lie_bracket(Y, X)


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_integrating_an_exact_form_recovers_the_function(seed):
    rng = random.Random(seed)
    chart = chart_of(4)
    f = rand_poly(rng, chart, 3, 5)
    df = exterior_derivative(DiffForm.function(chart, f))
    g = integrate_closed_one_form(df)
    assert exterior_derivative(DiffForm.function(chart, g)) == df
    assert (f - g).is_constant()


def test_integration_refuses_non_closed_forms():
    chart = chart_of(2)
    with pytest.raises(NotClosed):
        integrate_closed_one_form(parse_form("x0 dx1", chart))


def test_first_slot_contraction():
    chart = Chart("c", ("x", "y"))
    omega = parse_form("dx^dy", chart)
    assert interior(VectorField.coordinate(chart, "x"), omega) == parse_form("dy", chart)
    assert interior(VectorField.coordinate(chart, "y"), omega) == parse_form("-dx", chart)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(0, 3))
def test_form_print_parse_round_trip(seed, k):
    rng = random.Random(seed)
    chart = Chart("c", ("x0", "x1", "x2", "m"), ("m",), ("m",))
    a = rand_form(rng, chart, k)
    assume(a)  # the zero form prints as "0" in every degree
    assert parse_form(str(a), chart) == a


def test_form_parse_errors():
    chart = chart_of(2)
    with pytest.raises(ParseError):
        parse_form("dx0 + dx0^dx1", chart)
    with pytest.raises(ParseError):
        parse_form("dx0*dx1", chart)
    with pytest.raises(ParseError):
        parse_form("x0 / x1 dx0", chart)


def test_chart_mismatch():
    a = parse_form("dx0", chart_of(2, "a"))
    b = parse_form("dx0", chart_of(2, "b"))
    with pytest.raises(ChartMismatch):
        wedge(a, b)


def test_closedness_and_nonclosed_example():
    chart = chart_of(3)
    assert not exterior_derivative(parse_form("dx0^dx1 + x2 dx0^dx2", chart))
    d = exterior_derivative(parse_form("x2 dx0^dx1", chart))
    assert d.components == {(0, 1, 2): chart.poly(Fraction(1))}
