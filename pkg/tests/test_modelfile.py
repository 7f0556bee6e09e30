import pytest

from presym.modelfile import ModelFileError, dumps, loads
from presym.models import BUILTIN
from presym.momred import build_momentum

PENDULUM = """
# planar oscillator in a rotating-frame style
name = osc
coordinates = x y
velocities = x:u, y:v
parameters = k
lagrangian = 1/2*(u^2 + v^2) - 1/2*k*(x^2 + y^2)
theta = lagrangian
generator rot = x: -y; y: x; u: -v; v: u
"""


def same_model(a, b):
    sa, sb = a.system, b.system
    assert sa.chart == sb.chart
    assert sa.omega == sb.omega
    assert sa.hamiltonian == sb.hamiltonian
    assert a.theta == b.theta
    assert a.stage == b.stage and a.sode == b.sode
    assert (a.action is None) == (b.action is None)
    if a.action is not None:
        assert a.action.generators == b.action.generators
        assert a.action.structure_constants == b.action.structure_constants


@pytest.mark.parametrize("name", sorted(BUILTIN))
def test_builtin_models_round_trip(name, model):
    m = model(name)
    text = dumps(m)
    again = loads(text).build()
    same_model(m, again)
    assert dumps(again) == text


def test_lagrangian_model_from_text():
    m = loads(PENDULUM).build()
    assert m.system.chart.coords == ("x", "y", "u", "v")
    assert m.system.hamiltonian == m.system.chart.poly("1/2*u^2 + 1/2*v^2 + 1/2*k*x^2 + 1/2*k*y^2")
    mm = build_momentum(m.system, m.action)
    assert mm.poissonian.verdict == "strict"


def test_declared_brackets_are_used():
    text = """
name = plane
coordinates = q p
omega = dq^dp
hamiltonian = 1/2*p^2
generator a = q: 1
generator b = p: 1
bracket a b = 0
"""
    m = loads(text).build()
    assert m.action.declared_constants
    assert m.action.structure_constants == {(0, 1): {}}


@pytest.mark.parametrize(
    "text, line, message",
    [
        ("name = a\ncoords = x", 2, "unknown key"),
        ("name = a\nname = b", 2, "duplicate key"),
        ("just words", 1, "expected 'key = value'"),
        ("coordinates = x y\nomega = dx^dy\nhamiltonian = x*)", 3, "hamiltonian"),
        ("coordinates = x y\nomega = dx^dy\ngenerator g = z: 1", 3, "not a coordinate"),
        ("coordinates = x\nvelocities = x\nlagrangian = x", 2, "position:velocity"),
    ],
)
def test_errors_name_the_line(text, line, message):
    with pytest.raises(ModelFileError, match=message) as info:
        loads(text).build()
    assert info.value.line == line


def test_expression_errors_carry_a_column():
    with pytest.raises(ModelFileError) as info:
        loads("coordinates = x y\nomega = dx^dy\nhamiltonian = x + + ").build()
    assert info.value.column is not None


def test_comments_and_blank_lines_are_ignored():
    m = loads("# header\n\ncoordinates = q p  # phase space\nomega = dq^dp\n").build()
    assert m.system.chart.coords == ("q", "p")
