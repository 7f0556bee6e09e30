from fractions import Fraction
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from presym.cartan import Chart, VectorField, parse_form
from presym.constraints import ConstraintSet
from presym.momred import (
    ActionSpec,
    NotLocallyHamiltonian,
    NotWeaklyRegular,
    OffLevelSet,
    build_momentum,
    build_time_extended,
    check_coisotropic,
    coisotropic_extend,
    dynamics_on_level,
    infer_structure_constants,
    level_set,
    pfaff_check,
    reduce,
    route_equivalence,
    time_extended_flow,
)
from presym.models import capri_s
from presym.presymp import PresympSystem

R4 = Chart("r4", ("q1", "p1", "q2", "p2"))


def canonical():
    return PresympSystem(R4, parse_form("dq1^dp1 + dq2^dp2", R4), "1/2*p1^2 + 1/2*p2^2")


def translations():
    return ActionSpec(R4, [("t1", VectorField.coordinate(R4, "q1")),
                           ("t2", VectorField.coordinate(R4, "q2"))])


def test_momenta_of_translations():
    mm = build_momentum(canonical(), translations())
    assert mm.hamiltonians == (R4.poly("p1"), R4.poly("p2"))
    assert mm.poissonian.verdict == "strict"


def test_weak_poissonian_verdict():
    # p1 and -q1 have constant bracket
    action = ActionSpec(R4, [("a", VectorField.coordinate(R4, "q1")),
                             ("b", VectorField.coordinate(R4, "p1"))])
    mm = build_momentum(canonical(), action)
    assert mm.poissonian.verdict == "weak"


def test_non_symmetry_is_refused():
    action = ActionSpec(R4, [("bad", VectorField(R4, {"q1": R4.poly("p2")}))])
    with pytest.raises(NotLocallyHamiltonian):
        build_momentum(canonical(), action)


def test_structure_constants_of_rotations():
    chart = Chart("c", ("x", "y", "z"))
    X = chart.var
    rot = [
        ("L1", VectorField(chart, {"y": -X("z"), "z": X("y")})),
        ("L2", VectorField(chart, {"x": X("z"), "z": -X("x")})),
        ("L3", VectorField(chart, {"x": -X("y"), "y": X("x")})),
    ]
    C = infer_structure_constants(rot)
    assert C[(0, 1)] == {2: Fraction(-1)}


def test_level_set_labels_and_reduction():
    sys = canonical()
    mm = build_momentum(sys, translations())
    C = level_set(mm, [1, 2])
    assert C.labels == ("t1", "t2")
    red = reduce(sys, mm, [1, 2])
    assert (red.level_dim, red.quotient_dim, red.reduced_rank) == (2, 0, 0)
    assert red.symplectic


def test_pfaff_check_detects_a_wrong_constraint():
    sys = canonical()
    mm = build_momentum(sys, translations())
    bad = ConstraintSet(R4, ["p1 + 1", "2*p2"], labels=("t1", "t2"))
    v = pfaff_check(mm, bad)
    assert not v and v.failed_name == "t2"


def test_off_level_base_point():
    sys = canonical()
    mm = build_momentum(sys, translations())
    with pytest.raises(OffLevelSet):
        reduce(sys, mm, [1, 2], {"q1": 0, "p1": 0, "q2": 0, "p2": 0})


def test_kernel_generator_with_conflicting_level(model):
    m = model("capri")
    target, action = m.reduction_target()
    mm = build_momentum(target, action)
    with pytest.raises(NotWeaklyRegular, match="conflicts"):
        level_set(mm, [0, 0, 1, 0])


def test_time_extended_flow_and_level_dynamics(model):
    m = model("autonomous-r2")
    sys = m.system
    X = time_extended_flow(sys)
    chart = sys.chart
    # i(d/dt + Y) Omega_h = 0 with Omega_h = omega_P + dt^dh gives i(Y) omega_P = -dh
    assert X == VectorField(chart, {"q1": chart.poly("-p1"), "p1": chart.poly(1),
                                    "q2": chart.poly("-p2"), "p2": chart.poly("q2"),
                                    "t": chart.poly(1)})
    mm = build_momentum(sys, m.action)
    fam = dynamics_on_level(sys, mm, [1])
    assert fam.particular == X


def test_time_extension_rejects_a_clash():
    P = Chart("p", ("q", "t"))
    with pytest.raises(ValueError):
        build_time_extended(parse_form("dq^dt", P), P.poly("q"))


def test_coisotropic_extension_of_a_degenerate_system():
    chart = Chart("d", ("q", "p", "z"))
    sys = PresympSystem(chart, parse_form("dq^dp", chart), "1/2*p^2")
    ext = coisotropic_extend(sys)
    assert ext.momenta == ("p_z",)
    assert ext.ambient.chart.coords == ("q", "p", "z", "p_z")
    assert check_coisotropic(ext, samples=8) == 8


def test_route_report_serializes(model):
    m = model("capri-s")
    mm = build_momentum(m.system, m.action)
    rep = route_equivalence(m.system, mm, [-1, -1])
    data = json.loads(rep.to_json())
    assert data["agree"] and set(data["routes"]) == {"complete", "gauge-then-symplectic", "coisotropic"}


CAPRI_S = capri_s()
levels = st.fractions(min_value=-3, max_value=3, max_denominator=3).filter(lambda v: v != 0)


@settings(max_examples=8, deadline=None)
@given(levels, levels)
def test_routes_agree_on_the_symplectic_final_system(mu1, mu2):
    m = CAPRI_S
    mm = build_momentum(m.system, m.action)
    rep = route_equivalence(m.system, mm, [mu1, mu2])
    assert rep.agree
    assert rep.results["complete"]["quotient_dim"] == 4
