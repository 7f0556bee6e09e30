import json

import pytest

from presym.cartan import Chart, VectorField, parse_form
from presym.gotay import (
    BifurcationError,
    GenerationCapExceeded,
    NotCompatible,
    adapt_kernel_coordinates,
    gauge_fields,
    gauge_reduce,
    stabilize,
)
from presym.presymp import PresympSystem, kernel_distribution

C3 = Chart("c", ("q", "p", "z"))


def small(h):
    return PresympSystem(C3, parse_form("dq^dp", C3), h)


def test_compatible_system_needs_no_constraints():
    rep = stabilize(small("1/2*p^2 + q"))
    assert rep.final_dim == 3
    assert rep.free_parameters == ["c_z"]
    assert [g.index for g in rep.generations] == [0]


def test_compatibility_constraint_and_parameter_fixing():
    # dH/dz = p + z must vanish; tangency then fixes the gauge parameter c_z
    rep = stabilize(small("p*z + 1/2*z^2 + q"))
    assert rep.generation_constraints() == [[C3.poly("p + z")]]
    assert rep.free_parameters == []
    assert rep.final_dim == 2


def test_non_unit_coefficient_is_a_bifurcation():
    with pytest.raises(BifurcationError, match="c_z"):
        stabilize(small("1/2*z^2*q + z"))


def test_inconsistent_dynamics_is_rejected():
    with pytest.raises(NotCompatible, match="no solution"):
        stabilize(small("q*z + p"))


def test_generation_cap(model):
    with pytest.raises(GenerationCapExceeded):
        m = model("capri")
        stabilize(m.system, sode=True, sode_pairing=m.sode_pairing, max_generations=1)


def test_capri_without_second_order_condition(stabilized):
    rep = stabilized("capri", False)
    chart = rep.chart
    assert rep.generation_constraints() == [[chart.var("x1"), chart.var("y1")]]
    assert rep.generations[1].fixings == {"c_x1": 0, "c_y1": 0}
    assert rep.free_parameters == ["c_u1", "c_v1"]
    assert rep.final_dim == 10
    assert rep.nondynamical_count == 0


def test_capri_with_second_order_condition(stabilized):
    rep = stabilized("capri", True)
    chart = rep.chart
    E = rep.extended_chart
    assert rep.sode_fixings == {"c_x1": E.var("u1"), "c_y1": E.var("v1")}
    assert rep.generation_constraints() == [
        [chart.var("x1"), chart.var("y1")],
        [chart.var("u1"), chart.var("v1")],
    ]
    assert rep.generations[2].nondynamical == [True, True]
    assert rep.free_parameters == []
    assert rep.final_dim == 8
    X = rep.family.particular
    assert X["u2"] == E.poly("-(v2 + x2)/m2")
    assert X["v3"] == E.poly("(u3 - y3)/m3")


def test_final_system_is_pulled_back_to_a_slice(model, stabilized):
    m = model("capri")
    final = stabilized("capri", True).final_system(m.system)
    assert final.chart.coords == ("x2", "x3", "y2", "y3", "u2", "u3", "v2", "v3")
    assert final.rank == 8


def test_conformal_final_set_keeps_the_ambient_chart(model, stabilized):
    m = model("conformal")
    rep = stabilized("conformal", False)
    assert len(rep.final) == 3
    final = rep.final_system(m.system)
    assert final.constraints is not None
    assert rep.free_parameters == ["c_lam", "c_u"]
    sode = stabilized("conformal", True)
    assert sode.sode_fixings["c_lam"] == sode.extended_chart.var("u")
    assert sode.free_parameters == ["c_u"]


def test_gauge_fields_on_a_constrained_final_system(model, stabilized):
    m = model("conformal")
    rep = stabilized("conformal", False)
    C = rep.final.on(m.system.chart)
    C.sampler = m.sampler
    final = m.system.with_constraints(C)
    chart = m.system.chart
    assert gauge_fields(final) == [VectorField.coordinate(chart, "lam"),
                                   VectorField.coordinate(chart, "u")]


def test_report_serialization_is_stable(stabilized):
    rep = stabilized("capri", True)
    text = rep.to_json()
    assert text == rep.to_json()
    data = json.loads(text)
    assert data["schema"] == 1
    assert data["final"]["dimension"] == 8
    assert "final dimension 8" in rep.to_text()


def test_adapted_coordinates_straighten_a_slanted_kernel():
    chart = Chart("s", ("a", "b", "c"))
    # kernel spanned by d/da + d/db
    sys = PresympSystem(chart, parse_form("da^dc - db^dc", chart), "a - b")
    new, images, pivots = adapt_kernel_coordinates(sys)
    assert pivots == ["a"]
    assert kernel_distribution(new) == [VectorField.coordinate(chart, "a")]
    reduced = gauge_reduce(sys)
    assert reduced.chart.coords == ("b", "c")
    assert kernel_distribution(reduced) == []


def test_gauge_reduce_checks_compatibility():
    with pytest.raises(NotCompatible):
        gauge_reduce(small("z"))
