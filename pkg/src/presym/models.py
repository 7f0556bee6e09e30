"""Built-in example systems and the tangent-bundle recipe for Lagrangians.

For a Lagrangian ``L(q, v)`` the recipe builds ``theta_L = (dL/dv^i) dq^i``,
``omega_L = -d theta_L`` and ``E_L = v^i dL/dv^i - L``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .cartan import Chart, DiffForm, VectorField, exterior_derivative, parse_form
from .constraints import random_rational
from .presymp import PresympSystem

__all__ = [
    "Model",
    "lagrangian_data",
    "lagrangian_system",
    "capri",
    "capri_s",
    "conformal",
    "autonomous_r2",
    "BUILTIN",
    "get_model",
]


@dataclass
class Model:
    """A system together with its symmetry data and how it should be processed.

    ``stage`` is ``"ambient"`` when reductions act on the final system of a
    stabilization run (with ``sode`` selecting the mode), and ``"system"``
    when they act on ``system`` directly.
    """

    name: str
    system: PresympSystem
    action: object = None
    sode_pairing: dict = field(default_factory=dict)
    sampler: object = None
    lagrangian: object = None
    positions: tuple = ()
    velocities: tuple = ()
    theta: object = None
    stage: str = "system"
    sode: bool = False
    time_extension: object = None  # (omega_P text chart, h) for time-extended models
    description: str = ""
    kernel_pairing: dict = field(default_factory=dict)

    def stabilized(self, sode=None):
        from .gotay import stabilize

        mode = self.sode if sode is None else sode
        return stabilize(self.system, sode=mode, sode_pairing=self.sode_pairing,
                         sampler=self.sampler)

    def reduction_target(self, slice_chart=True):
        """(system, action) the momentum-map operations act on."""
        if self.stage == "system":
            return self.system, self.action
        report = self.stabilized()
        final = report.final_system(self.system) if slice_chart else None
        if final is None or final.constraints is not None:
            final = PresympSystem(
                self.system.chart, self.system.omega, self.system.hamiltonian,
                constraints=report.final.on(self.system.chart) if len(report.final) else None,
                name=f"{self.name}/final", parameter_values=self.system.parameter_values,
            )
            if final.constraints is not None:
                final.constraints.sampler = self.sampler
            return final, self.action
        return final, self.action.to_slice(report.final, final.chart) if self.action else None


def lagrangian_data(chart, positions, velocities, L):
    """``(theta_L, omega_L, E_L)`` for a Lagrangian on a tangent-bundle chart."""
    L = chart.poly(L)
    if len(positions) != len(velocities):
        raise ValueError("positions and velocities must pair up")
    theta = DiffForm.zero(chart, 1)
    energy = -L
    for q, v in zip(positions, velocities):
        p = L.diff(v)
        theta = theta + DiffForm.differential(chart, q) * p
        energy = energy + chart.var(v) * p
    omega = -exterior_derivative(theta)
    return theta, omega, energy


def lagrangian_system(name, positions, velocities, L, parameters=(), laurent=(),
                      parameter_values=None):
    chart = Chart(name, tuple(positions) + tuple(velocities) + tuple(parameters),
                  tuple(parameters), tuple(laurent))
    theta, omega, energy = lagrangian_data(chart, positions, velocities, L)
    sys = PresympSystem(chart, omega, energy, name=name, parameter_values=parameter_values)
    return sys, theta


def _rotation_field(chart, x, y, u, v):
    X = chart.var
    return VectorField(chart, {y: X(x), x: -X(y), v: X(u), u: -X(v)})


CAPRI_LAGRANGIAN = (
    "m2*(u2^2 + v2^2) + m3*(u3^2 + v3^2) - v2*x2 + u2*y2 - v3*x3 + u3*y3"
    " - x1^2 - x2^2 - x3^2 - y1^2 - y2^2 - y3^2"
)
CAPRI_POSITIONS = ("x1", "x2", "x3", "y1", "y2", "y3")
CAPRI_VELOCITIES = ("u1", "u2", "u3", "v1", "v2", "v3")


def capri():
    """Two massive and one massless complex mode with a gyroscopic coupling, on R^12."""
    from .momred import ActionSpec

    sys, theta = lagrangian_system(
        "capri", CAPRI_POSITIONS, CAPRI_VELOCITIES, CAPRI_LAGRANGIAN,
        parameters=("m2", "m3"), laurent=("m2", "m3"),
    )
    chart = sys.chart
    gens = [
        ("xi1", _rotation_field(chart, "x2", "y2", "u2", "v2")),
        ("xi2", _rotation_field(chart, "x3", "y3", "u3", "v3")),
        ("xi3", VectorField.coordinate(chart, "u1")),
        ("xi4", VectorField.coordinate(chart, "v1")),
    ]
    action = ActionSpec(chart, gens, exact_one_form=theta)
    return Model(
        "capri", sys, action,
        sode_pairing=dict(zip(CAPRI_VELOCITIES, CAPRI_POSITIONS)),
        lagrangian=chart.poly(CAPRI_LAGRANGIAN),
        positions=CAPRI_POSITIONS, velocities=CAPRI_VELOCITIES, theta=theta,
        stage="ambient", sode=False,
        description="three-mode gyroscopic model on TQ = R^12, reduced on its final constraint set",
        kernel_pairing={"xi3": chart.var("x1"), "xi4": chart.var("y1")},
    )


def capri_s():
    """The second-order final system of :func:`capri`, a symplectic system on R^8."""
    from .constraints import pullback_to_slice
    from .momred import ActionSpec

    base = capri()
    report = base.stabilized(sode=True)
    C = report.final.on(base.system.chart)
    omega = pullback_to_slice(base.system.omega, C)
    chart = omega.chart
    chart = Chart("capri-s", chart.variables, chart.parameters, chart.laurent)
    omega = omega.on(chart)
    H = pullback_to_slice(base.system.hamiltonian, C).on(chart.variables)
    theta = pullback_to_slice(base.theta, C).on(chart)
    sys = PresympSystem(chart, omega, H, name="capri-s")
    gens = [
        ("xi1", _rotation_field(chart, "x2", "y2", "u2", "v2")),
        ("xi2", _rotation_field(chart, "x3", "y3", "u3", "v3")),
    ]
    action = ActionSpec(chart, gens, exact_one_form=theta)
    return Model(
        "capri-s", sys, action, theta=theta, stage="system",
        description="second-order final system of the three-mode model, symplectic on R^8",
    )


def _metric_signature(d):
    return (1,) + (-1,) * d + (1,)


def _cayley(A):
    """``(I - A)(I + A)^-1`` for a skew-symmetric rational matrix: a rational rotation."""
    from . import _elim

    n = len(A)
    I = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    P = [[I[i][j] + A[i][j] for j in range(n)] for i in range(n)]
    Mi = [[I[i][j] - A[i][j] for j in range(n)] for i in range(n)]
    # solve R (I + A) = (I - A)  <=>  (I + A)^T R^T = (I - A)^T
    PT = [[P[j][i] for j in range(n)] for i in range(n)]
    cols = [[Mi[r][c] for c in range(n)] for r in range(n)]  # rows of (I - A) are columns of its transpose
    sols, _ = _elim.solve(PT, cols)
    return [[sols[r][c] for c in range(n)] for r in range(n)]


def _random_skew(rng, n):
    A = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            a = random_rational(rng, nonzero=False)
            A[i][j], A[j][i] = a, -a
    return A


def conformal_sampler(d=2):
    """Exact points on ``g(q,q) = g(q,v) = g(v,v) = 0``.

    Positive directions are indices 0 and d+1, negative ones 1..d.  The plane
    spanned by ``e_0 + e_1`` and ``e_{d+1} + e_2`` is totally null; a random
    rational rotation of each definite block moves it around, and ``q``, ``v``
    are random combinations of its basis.
    """
    if d < 2:
        raise ValueError("the null-plane sampler needs d >= 2")
    pos = [0, d + 1]
    neg = list(range(1, d + 1))

    def sampler(rng):
        Rp = _cayley(_random_skew(rng, 2))
        Rn = _cayley(_random_skew(rng, d))
        basis = []
        for k in range(2):
            vec = [Fraction(0)] * (d + 2)
            for i, a in enumerate(pos):
                vec[a] = Rp[i][k]
            for i, a in enumerate(neg):
                vec[a] = Rn[i][k]
            basis.append(vec)
        a, b, c, e = (random_rational(rng, nonzero=False) for _ in range(4))
        point = {}
        for i in range(d + 2):
            point[f"q{i}"] = a * basis[0][i] + b * basis[1][i]
            point[f"v{i}"] = c * basis[0][i] + e * basis[1][i]
        point["lam"] = random_rational(rng, nonzero=False)
        point["u"] = random_rational(rng, nonzero=False)
        return point

    sampler.hint = f"null-plane d={d}"
    return sampler


def _g(chart, d, a, b):
    sig = _metric_signature(d)
    return sum((chart.var(f"{a}{i}") * chart.var(f"{b}{i}") * s for i, s in enumerate(sig)),
               chart.zero())


def conformal(d=2):
    """Massless particle with local scale invariance on T(R^{d+2} x R)."""
    from .momred import ActionSpec

    n = d + 2
    qs = tuple(f"q{i}" for i in range(n)) + ("lam",)
    vs = tuple(f"v{i}" for i in range(n)) + ("u",)
    sig = _metric_signature(d)
    terms = []
    for i, s in enumerate(sig):
        sign = "+" if s > 0 else "-"
        terms.append(f" {sign} 1/2*v{i}^2 {'-' if s > 0 else '+'} 1/2*lam*q{i}^2")
    L = "".join(terms).strip()
    if L.startswith("+"):
        L = L[1:].strip()
    sys, theta = lagrangian_system("conformal", qs, vs, L)
    chart = sys.chart
    X = chart.var
    xi1 = VectorField(chart, {f"v{i}": X(f"q{i}") for i in range(n)})
    comps = {f"v{i}": X(f"v{i}") for i in range(n)}
    comps.update({f"q{i}": -X(f"q{i}") for i in range(n)})
    xi2 = VectorField(chart, comps)
    xi3 = VectorField(chart, {f"q{i}": X(f"v{i}") for i in range(n)})
    gens = [
        ("xi1", xi1), ("xi2", xi2), ("xi3", xi3),
        ("xi4", VectorField.coordinate(chart, "lam")),
        ("xi5", VectorField.coordinate(chart, "u")),
    ]
    action = ActionSpec(chart, gens)
    return Model(
        "conformal" if d == 2 else f"conformal-d{d}", sys, action,
        sode_pairing=dict(zip(vs, qs)), sampler=conformal_sampler(d),
        lagrangian=chart.poly(L), positions=qs, velocities=vs, theta=theta,
        stage="ambient", sode=True,
        description=f"conformal particle in R^{d + 2} with signature {sig}",
    )


def conformal_constraints(chart, d=2):
    """``(eta1, eta2, eta3)`` in the usual normalization."""
    qq = _g(chart, d, "q", "q")
    qv = _g(chart, d, "q", "v")
    vv = _g(chart, d, "v", "v")
    return qq * Fraction(1, 2), qv, vv - chart.var("lam") * qq


AUTONOMOUS_OMEGA = "dq1^dp1 + dq2^dp2"
AUTONOMOUS_H = "1/2*p1^2 + 1/2*p2^2 + 1/2*q2^2 + q1"


def autonomous_r2():
    """Time-extended free system on R^4 x R with time translations."""
    from .momred import ActionSpec, build_time_extended

    P = Chart("autonomous-r2", ("q1", "p1", "q2", "p2"))
    omega_P = parse_form(AUTONOMOUS_OMEGA, P)
    h = P.poly(AUTONOMOUS_H)
    sys = build_time_extended(omega_P, h, name="autonomous-r2")
    chart = sys.chart
    action = ActionSpec(chart, [("time", VectorField.coordinate(chart, "t"))])
    return Model(
        "autonomous-r2", sys, action, stage="system", time_extension=(omega_P, h),
        description="autonomous Hamiltonian system on R^4 written on R^4 x R",
    )


BUILTIN = {
    "capri": capri,
    "capri-s": capri_s,
    "conformal": conformal,
    "autonomous-r2": autonomous_r2,
}


def get_model(name):
    try:
        return BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; choose from {sorted(BUILTIN)}") from None
