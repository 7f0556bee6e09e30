"""Infinitesimal actions, momentum maps and reduction.

Actions are given by their fundamental vector fields.  A momentum map
assigns each generator a function ``f`` with ``i(xi) Omega = df``; level
sets of these functions are reduced pointwise with :mod:`presym.linred`,
and explicitly when the level set is a coordinate slice with a constant,
coordinate-spanned kernel.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import json

from . import _elim
from .cartan import (
    Chart,
    DiffForm,
    VectorField,
    exterior_derivative,
    integrate_closed_one_form,
    interior,
    lie_bracket,
    lie_derivative,
)
from .constraints import (
    ConstraintSet,
    NoSampler,
    pullback_to_slice,
    restrict_field_to_slice,
    vanishes_on,
)
from .gotay import NotCompatible, adapt_kernel_coordinates, gauge_reduce
from .linred import LinForm, Subspace, kernel, linear_reduce, perp, pointwise
from .presymp import (
    NonConstantForm,
    PresympSystem,
    SolutionFamily,
    _solve_interior,
    hamiltonian_vector_field,
    kernel_distribution,
)
from .symexpr import Poly

__all__ = [
    "ActionSpec",
    "MomentumMap",
    "PoissonVerdict",
    "ReducedSpace",
    "NotLocallyHamiltonian",
    "NotWeaklyRegular",
    "OffLevelSet",
    "RankDrop",
    "TangencyError",
    "ExtensionHypothesisError",
    "build_momentum",
    "level_set",
    "pfaff_check",
    "reduce",
    "dynamics_on_level",
    "coisotropic_extend",
    "route_equivalence",
    "build_time_extended",
    "time_extended_flow",
    "extend_momentum_noncompatible",
    "kernel_span_certificate",
    "infer_structure_constants",
    "check_coisotropic",
    "KernelSpan",
    "CoisotropicExtension",
    "MomentumExtension",
    "PfaffVerdict",
    "RouteReport",
    "TimeExtendedSystem",
]


class NotLocallyHamiltonian(ValueError):
    """``i(xi) Omega`` is not closed for some generator."""


class NotWeaklyRegular(ValueError):
    pass


class OffLevelSet(ValueError):
    pass


class RankDrop(ValueError):
    pass


class TangencyError(ValueError):
    pass


class ExtensionHypothesisError(ValueError):
    pass


# ---------------------------------------------------------------------------
# actions


def infer_structure_constants(generators):
    """Rational ``c^k_ij`` with ``[xi_i, xi_j] = sum_k c^k_ij xi_k``, or ``None``."""
    out = {}
    fields = [X for _, X in generators]
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            B = lie_bracket(fields[i], fields[j])
            if B.is_zero():
                continue
            rows, rhs = [], []
            keys = set()
            for X in fields + [B]:
                for name, c in X.components.items():
                    for exps in c.term_dict():
                        keys.add((name, exps))
            for name, exps in sorted(keys):
                rows.append({k: X[name].term_dict().get(exps, 0)
                             for k, X in enumerate(fields) if X[name].term_dict().get(exps, 0)})
                rhs.append(B[name].term_dict().get(exps, 0))
            sol = _elim.sparse_solve(rows, rhs)
            if sol is None:
                return None
            out[(i, j)] = {k: Fraction(v) for k, v in sol.items() if v}
    return out


class ActionSpec:
    """Named fundamental vector fields on ``chart``.

    ``structure_constants`` maps ``(i, j)`` (i < j) to ``{k: c^k_ij}`` with
    ``[xi_i, xi_j] = sum_k c^k_ij xi_k``; when omitted they are inferred
    (rational constants only).  ``exact_one_form`` is an invariant 1-form
    ``Theta`` with ``Omega = +-d Theta``.  ``constants`` gives the Hamiltonian
    constant of generators lying in the kernel (default 0).
    """

    def __init__(self, chart, generators, *, structure_constants=None,
                 exact_one_form=None, constants=None):
        self.chart = chart
        self.generators = tuple((name, X) for name, X in generators)
        for name, X in self.generators:
            if X.chart != chart:
                raise ValueError(f"generator {name} lives on another chart")
        self.exact_one_form = exact_one_form
        self.constants = {k: Fraction(v) for k, v in (constants or {}).items()}
        if structure_constants is None:
            self.structure_constants = infer_structure_constants(self.generators)
            self.declared_constants = False
        else:
            self.structure_constants = {
                tuple(k): {int(a): Fraction(b) for a, b in v.items()}
                for k, v in structure_constants.items()
            }
            self.declared_constants = True
            self._check_brackets()

    def _check_brackets(self):
        fields = self.fields
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                expected = VectorField(self.chart)
                for k, c in self.structure_constants.get((i, j), {}).items():
                    expected = expected + fields[k] * c
                if lie_bracket(fields[i], fields[j]) != expected:
                    raise ValueError(
                        f"[{self.names[i]}, {self.names[j]}] does not match the declared "
                        "structure constants"
                    )

    @property
    def names(self):
        return [n for n, _ in self.generators]

    @property
    def fields(self):
        return [X for _, X in self.generators]

    def __len__(self):
        return len(self.generators)

    def to_slice(self, C, chart):
        """Restrict generators (tangent to the slice) to a slice chart."""
        gens = [(n, restrict_field_to_slice(X, C.on(self.chart), chart)) for n, X in self.generators]
        theta = None
        if self.exact_one_form is not None:
            theta = pullback_to_slice(self.exact_one_form, C.on(self.chart), chart)
        return ActionSpec(chart, gens, exact_one_form=theta, constants=self.constants,
                          structure_constants=self.structure_constants)


@dataclass(frozen=True)
class PoissonVerdict:
    """``strict``: every ``{f_j, f_i} - sum_k c^k_ij f_k`` is zero; ``weak``:
    all are constants; ``fails``: some defect is not constant; ``unknown``:
    no rational structure constants."""

    verdict: str
    defects: dict = field(default_factory=dict)

    def __str__(self):
        return self.verdict


@dataclass
class MomentumMap:
    system: PresympSystem
    action: ActionSpec
    hamiltonians: tuple
    poissonian: PoissonVerdict
    theta_sign: int = 0  # s with Omega = s d(Theta); 0 when no Theta was used

    def value(self, point):
        return [f.evaluate(point) for f in self.hamiltonians]


def _theta_sign(omega, theta):
    dtheta = exterior_derivative(theta)
    if dtheta == omega:
        return 1
    if dtheta == -omega:
        return -1
    raise ValueError("the exact one-form does not satisfy Omega = +-d(Theta)")


def build_momentum(sys, action):
    """Hamiltonian functions ``f_xi`` of every generator and the Poissonian verdict."""
    chart = sys.chart
    if action.chart != chart:
        raise ValueError("action and system live on different charts")
    theta = action.exact_one_form
    s = _theta_sign(sys.omega, theta) if theta is not None else 0
    hams = []
    for name, X in action.generators:
        beta = interior(X, sys.omega)
        if beta.is_zero():
            hams.append(chart.poly(action.constants.get(name, 0)))
            continue
        if chart.dim > 1 and exterior_derivative(beta):
            raise NotLocallyHamiltonian(f"i({name}) Omega is not closed")
        if theta is not None:
            if lie_derivative(X, theta):
                raise ValueError(f"{name} does not preserve the exact one-form")
            f = -interior(X, theta).scalar() * s
        else:
            f = integrate_closed_one_form(beta)
        if exterior_derivative(DiffForm.function(chart, f)) != beta:
            raise AssertionError(f"i({name}) Omega differs from d f for {name}")
        hams.append(f)
    verdict = _poisson_verdict(sys, action, hams)
    return MomentumMap(sys, action, tuple(hams), verdict, s)


def _poisson_verdict(sys, action, hams):
    C = action.structure_constants
    if C is None:
        return PoissonVerdict("unknown")
    fields = action.fields
    defects = {}
    worst = "strict"
    for i in range(len(fields)):
        for j in range(i + 1, len(fields)):
            # {f_j, f_i} = Omega(xi_j, xi_i)
            br = interior(fields[i], interior(fields[j], sys.omega)).scalar()
            for k, c in C.get((i, j), {}).items():
                br = br - hams[k] * c
            if br.is_zero():
                continue
            defects[(action.names[i], action.names[j])] = br
            if br.is_constant():
                worst = "weak" if worst == "strict" else worst
            else:
                worst = "fails"
    return PoissonVerdict(worst, defects)


# ---------------------------------------------------------------------------
# level sets


def level_set(mm, mu, *, check_regular=True, samples=16, seed=0):
    """Constraint set of ``f_xi - mu`` together with the system's own constraints.

    Kernel generators (constant ``f``) are dropped after checking ``mu``
    against the constant.  System constraints already implied by the level
    constraints are not repeated.  Labels name the generator of each level
    constraint (``"system"`` for the system's constraints).
    """
    sys = mm.system
    mu = [Fraction(m) for m in mu]
    if len(mu) != len(mm.hamiltonians):
        raise ValueError(f"mu has {len(mu)} entries, the action has {len(mm.hamiltonians)} generators")
    polys, labels = [], []
    for name, f, m in zip(mm.action.names, mm.hamiltonians, mu):
        if f.is_constant():
            if f.constant_value() != m:
                raise NotWeaklyRegular(
                    f"mu[{name}] = {m} conflicts with the constant Hamiltonian "
                    f"{f.constant_value()} of a kernel generator; the level set would be empty"
                )
            continue
        polys.append(f - m)
        labels.append(name)
    sampler = sys.constraints.sampler if sys.constraints is not None else None
    level = ConstraintSet(sys.chart, polys, labels=labels)
    if sys.constraints is not None:
        for z in sys.constraints.constraints:
            if polys and vanishes_on(z, level, fixed=sys.parameter_values).verdict == "certified":
                continue
            polys.append(z)
            labels.append("system")
    C = ConstraintSet(sys.chart, polys, labels=labels, sampler=sampler)
    if check_regular and len(C):
        try:
            points = C.sample_points(samples, seed=seed, fixed=sys.parameter_values)
        except NoSampler:
            points = []
        bad = C.check_regular(points)
        if bad:
            raise NotWeaklyRegular(
                f"constraint differentials are dependent at {len(bad)} of {len(points)} sample points"
            )
    return C


@dataclass(frozen=True)
class PfaffVerdict:
    passed: bool
    failed_index: int | None = None
    failed_name: str | None = None
    checked: tuple = ()

    def __bool__(self):
        return self.passed


def pfaff_check(mm, C):
    """``d zeta_i = i(xi_i) Omega`` for each level constraint of ``C``."""
    sys = mm.system
    names = mm.action.names
    checked = []
    for k, (z, label) in enumerate(zip(C.constraints, C.labels or ())):
        if label not in names:
            continue
        X = mm.action.fields[names.index(label)]
        dz = exterior_derivative(DiffForm.function(sys.chart, z))
        if dz != interior(X, sys.omega):
            return PfaffVerdict(False, k, label, tuple(checked))
        checked.append(label)
    return PfaffVerdict(True, None, None, tuple(checked))


# ---------------------------------------------------------------------------
# reduction


@dataclass(frozen=True)
class KernelSpan:
    """Whether every kernel field is a combination of generators.

    ``verdict`` is ``"certified"`` (polynomial combination found),
    ``"sampled"`` (pointwise inclusion at sample points) or ``"fails"``.
    """

    verdict: str
    combinations: tuple = ()

    def __bool__(self):
        return self.verdict in ("certified", "sampled")


def kernel_span_certificate(sys, action, *, degree_bound=2, samples=16, seed=0):
    if sys.constraints is None and sys.omega.is_constant_coefficient():
        combos = []
        for Z in kernel_distribution(sys):
            h = _combination(Z, action.fields, degree_bound)
            if h is None:
                return KernelSpan("fails")
            combos.append(h)
        return KernelSpan("certified", tuple(combos))
    if sys.constraints is not None and len(sys.constraints):
        try:
            points = sys.constraints.sample_points(samples, seed=seed, fixed=sys.parameter_values)
        except NoSampler:
            return KernelSpan("fails")
    else:
        import random

        from .presymp import random_point

        rng = random.Random(seed)
        points = [random_point(sys.chart, rng, sys.parameter_values) for _ in range(samples)]
    for x in points:
        form, T = sys.form_at(x)
        K = kernel(form) if form.dim else Subspace(0)
        gen = Subspace(sys.chart.dim, [X.evaluate(x) for X in action.fields])
        for v in K.basis:
            if not gen.contains(T.embed(v)):
                return KernelSpan("fails")
    return KernelSpan("sampled")


def _combination(Z, fields, bound):
    """Polynomials h_i (degree <= bound) with Z = sum h_i fields_i, or None."""
    from .constraints import _monomials

    chart = Z.chart
    V = chart.variables
    coord_idx = [V.index(x) for x in chart.coords]
    monos = []
    for m in _monomials(len(coord_idx), bound):
        full = [0] * len(V)
        for i, k in zip(coord_idx, m):
            full[i] = k
        monos.append(tuple(full))
    columns = [(i, m) for i in range(len(fields)) for m in monos]
    rows = {}
    for col, (i, m) in enumerate(columns):
        mono = Poly.monomial(V, dict(zip(V, m)))
        for name, c in fields[i].components.items():
            for exps, coef in (c * mono).term_dict().items():
                rows.setdefault((name, exps), {})[col] = coef
    target = {}
    for name, c in Z.components.items():
        for exps, coef in c.term_dict().items():
            target[(name, exps)] = coef
            rows.setdefault((name, exps), {})
    keys = sorted(rows)
    try:
        sol = _elim.sparse_solve([rows[k] for k in keys], [target.get(k, 0) for k in keys])
    except TypeError:
        return None  # parameter-dependent coefficients
    if sol is None:
        return None
    hs = [chart.zero() for _ in fields]
    for col, v in sol.items():
        i, m = columns[col]
        hs[i] = hs[i] + Poly.monomial(V, dict(zip(V, m)), v)
    check = VectorField(chart)
    for h, X in zip(hs, fields):
        check = check + X * h
    if check != Z:
        return None
    return tuple(hs)


@dataclass
class ReducedSpace:
    """Pointwise reduction data at ``base_point``.

    Subspaces are in ambient chart coordinates.  ``quotient_dim`` is the
    dimension of the orbit quotient ``dim T - dim isotropy``;
    ``reduced_rank`` is the rank of the level form; ``gauge_quotient_dim``
    is ``dim T - dim ker``.  The level form is symplectic on the quotient
    exactly when the isotropy equals the kernel.
    """

    level_constraints: ConstraintSet
    mu: tuple
    base_point: dict
    tangent: Subspace
    ker_level_form: Subspace
    isotropy_tangent: Subspace
    quotient_dim: int
    reduced_rank: int
    gauge_quotient_dim: int
    symplectic: bool
    kernel_span: KernelSpan
    kernel_decomposition_holds: bool
    explicit_chart: object = None
    explicit_dynamics: object = None

    @property
    def level_dim(self):
        return self.tangent.dim

    def to_dict(self):
        return {
            "schema": 1,
            "mu": [str(m) for m in self.mu],
            "level_constraints": [str(c) for c in self.level_constraints.constraints],
            "level_dim": self.level_dim,
            "isotropy_dim": self.isotropy_tangent.dim,
            "kernel_dim": self.ker_level_form.dim,
            "quotient_dim": self.quotient_dim,
            "reduced_rank": self.reduced_rank,
            "gauge_quotient_dim": self.gauge_quotient_dim,
            "symplectic": self.symplectic,
            "kernel_span": self.kernel_span.verdict,
            "explicit_chart": (
                None if self.explicit_chart is None
                else {"chart": list(self.explicit_chart.chart.coords),
                      "omega": str(self.explicit_chart.omega),
                      "hamiltonian": str(self.explicit_chart.hamiltonian)}
            ),
        }

    def to_text(self):
        d = self.to_dict()
        lines = [
            f"mu = ({', '.join(d['mu'])})",
            "level constraints: " + (", ".join(d["level_constraints"]) or "none"),
            f"level set dim {d['level_dim']}, isotropy dim {d['isotropy_dim']}, "
            f"kernel dim {d['kernel_dim']}",
            f"quotient dim {d['quotient_dim']}, reduced rank {d['reduced_rank']}, "
            f"symplectic {str(d['symplectic']).lower()}",
            f"kernel inside generator span: {d['kernel_span']}",
        ]
        if d["explicit_chart"]:
            e = d["explicit_chart"]
            lines.append(f"explicit chart ({', '.join(e['chart'])}): omega = {e['omega']}, "
                         f"H = {e['hamiltonian']}")
        return "\n".join(lines) + "\n"


def _check_on_level(C, point):
    for z in C.constraints:
        v = z.evaluate(point)
        if v:
            raise OffLevelSet(f"base point is off the level set: {z} = {v}")


def _pick_point(C, sys, base_point, seed):
    if base_point is None or base_point == "auto":
        if len(C):
            try:
                return C.sample_points(1, seed=seed, fixed=sys.parameter_values)[0]
            except NoSampler as exc:
                raise OffLevelSet(f"cannot find a point on the level set: {exc}") from None
        import random

        from .presymp import random_point

        return random_point(sys.chart, random.Random(seed), sys.parameter_values)
    point = {k: Fraction(v) for k, v in base_point.items()}
    for p, v in sys.parameter_values.items():
        point.setdefault(p, Fraction(v))
    return point


def _pointwise_data(sys, fields, point):
    """(form on T_xM in tangent coordinates, T_xM, generator span in tangent coordinates)."""
    form, T = sys.form_at(point)
    vecs = []
    for X in fields:
        v = X.evaluate(point)
        if not T.contains(v):
            raise TangencyError("a generator is not tangent to the system manifold at the point")
        vecs.append(T.coordinates(v))
    return form, T, Subspace(T.dim, vecs)


def reduce(sys, mm, mu, base_point=None, *, seed=0, kernel_span=None):
    """Reduce the level set ``J^-1(mu)`` at ``base_point`` (``None``/``"auto"``: sampled)."""
    C = level_set(mm, mu, seed=seed)
    point = _pick_point(C, sys, base_point, seed)
    _check_on_level(C, point)
    if sys.rank is not None and sys.rank_at(point) != sys.rank:
        raise RankDrop(f"rank {sys.rank_at(point)} at the base point, expected {sys.rank}")
    form, T, S = _pointwise_data(sys, mm.action.fields, point)
    lr = linear_reduce(form, S) if form.dim >= 2 else None
    T_level_amb = C.tangent_space(point) if len(C) else Subspace.whole(sys.chart.dim)
    if lr is None:
        N_amb = Subspace(sys.chart.dim, [T.embed(v) for v in Subspace.whole(T.dim).basis])
        K_amb = N_amb
        I_amb = Subspace(sys.chart.dim, [T.embed(v) for v in S.basis])
    else:
        N_amb = Subspace(sys.chart.dim, [T.embed(v) for v in lr.N.basis])
        K_amb = Subspace(sys.chart.dim, [T.embed(v) for v in lr.kernel_of_alpha_N.basis])
        I_amb = Subspace(sys.chart.dim, [T.embed(v) for v in lr.N_cap_S.basis])
    if N_amb != T_level_amb:
        raise NotWeaklyRegular(
            "tangent space of the level set differs from the orthogonal of the generators "
            f"(dims {T_level_amb.dim} and {N_amb.dim})"
        )
    K_sys = Subspace(sys.chart.dim, [T.embed(v) for v in kernel(form).basis]) if form.dim else Subspace(sys.chart.dim)
    decomposition = K_amb == I_amb + K_sys
    if kernel_span is None:
        kernel_span = kernel_span_certificate(sys, mm.action, seed=seed)
    quotient_dim = N_amb.dim - I_amb.dim
    reduced_rank = N_amb.dim - K_amb.dim
    explicit, dynamics = _explicit_chart(sys, C)
    return ReducedSpace(
        level_constraints=C,
        mu=tuple(Fraction(m) for m in mu),
        base_point=point,
        tangent=N_amb,
        ker_level_form=K_amb,
        isotropy_tangent=I_amb,
        quotient_dim=quotient_dim,
        reduced_rank=reduced_rank,
        gauge_quotient_dim=reduced_rank,
        symplectic=I_amb == K_amb,
        kernel_span=kernel_span,
        kernel_decomposition_holds=decomposition,
        explicit_chart=explicit,
        explicit_dynamics=dynamics,
    )


def _explicit_chart(sys, C):
    """Quotient of the level set by its kernel when both are coordinate-friendly."""
    if not C.all_solvable():
        return None, None
    try:
        if len(C):
            omega = pullback_to_slice(sys.omega, C)
            H = pullback_to_slice(sys.hamiltonian, C)
            level = PresympSystem(omega.chart, omega, H, rank_samples=0,
                                  parameter_values=sys.parameter_values)
        else:
            level = PresympSystem(sys.chart, sys.omega, sys.hamiltonian, rank_samples=0,
                                  parameter_values=sys.parameter_values)
        if not level.omega.is_constant_coefficient():
            return None, None
        reduced = gauge_reduce(level)
    except (NonConstantForm, NotCompatible, _elim.NonUnitPivot):
        return None, None
    family = hamiltonian_vector_field(reduced, reduced.hamiltonian)
    return reduced, family


def dynamics_on_level(sys, mm, mu, family=None, *, seed=0):
    """Solution family of the dynamics, checked to be tangent to ``J^-1(mu)``."""
    C = level_set(mm, mu, check_regular=False)
    if family is None:
        if isinstance(sys, TimeExtendedSystem):
            family = SolutionFamily(time_extended_flow(sys))
        else:
            if sys.constraints is not None and len(sys.constraints):
                raise NonConstantForm("pass the solution family of a constrained system explicitly")
            family = hamiltonian_vector_field(sys, sys.hamiltonian)
            if family is None:
                raise NotCompatible("the system has no global solution; stabilize it first")
    chart = family.particular.chart
    names = family.free_parameter_names
    if names and not all(n in chart.variables for n in names):
        E = chart.extend(names, parameters=True)
        X = family.particular.on(E)
        for n, Z in zip(names, family.kernel_basis):
            X = X + Z.on(E) * E.var(n)
        CE = C.on(E) if E != C.chart else C
    else:
        X = family.general() if names else family.particular
        CE = C.on(chart) if chart != C.chart else C
    for z in CE.constraints:
        r = X(z)
        if r and not vanishes_on(r, CE, seed=seed, fixed=sys.parameter_values):
            raise TangencyError(f"the dynamics is not tangent to the level set: X({z}) = {r}")
    return SolutionFamily(family.particular, family.kernel_basis, names, C)


# ---------------------------------------------------------------------------
# coisotropic extension


@dataclass
class CoisotropicExtension:
    ambient: PresympSystem
    inclusion: dict  # momentum name -> 0
    kernel_coords: tuple
    momenta: tuple
    coordinate_images: dict  # original coordinates in the adapted ones (identity when none was needed)
    adapted: PresympSystem

    def extend_function(self, f, field):
        """``f + sum_j field^{z_j} p_j`` on the ambient chart."""
        chart = self.ambient.chart
        g = f.on(chart.variables)
        for z, p in zip(self.kernel_coords, self.momenta):
            g = g + field[z].on(chart.variables) * chart.var(p)
        return g


def coisotropic_extend(sys, *, samples=64, seed=0):
    """Symplectic ambient system containing ``sys`` as the zero section ``p = 0``."""
    if sys.constraints is not None and len(sys.constraints):
        raise NonConstantForm("coisotropic_extend needs an unconstrained system")
    kernel_fields = kernel_distribution(sys)
    images = {x: sys.chart.var(x) for x in sys.chart.coords}
    adapted = sys
    if kernel_fields and not all(
        len(Z.components) == 1 and next(iter(Z.components.values())) == 1 for Z in kernel_fields
    ):
        adapted, images, _ = adapt_kernel_coordinates(sys)
        kernel_fields = kernel_distribution(adapted)
    zs = tuple(next(iter(Z.components)) for Z in kernel_fields)
    taken = set(sys.chart.variables)
    ps = []
    for z in zs:
        p = f"p_{z}"
        while p in taken:
            p += "_"
        taken.add(p)
        ps.append(p)
    chart = adapted.chart
    coords = chart.coords + tuple(ps)
    E = Chart(f"{chart.name}+", coords + chart.parameters, chart.parameters, chart.laurent)
    omega = adapted.omega.on(E)
    for z, p in zip(zs, ps):
        omega = omega + (DiffForm.differential(E, z) ^ DiffForm.differential(E, p))
    H = adapted.hamiltonian.on(E.variables)
    ambient = PresympSystem(E, omega, H, name=f"{sys.name}+", rank_samples=0,
                            parameter_values=sys.parameter_values)
    if kernel_distribution(ambient):
        raise AssertionError("ambient form is degenerate")
    zero = ConstraintSet(E, [E.var(p) for p in ps])
    if ps:
        back = pullback_to_slice(omega, zero)
        if back.on(chart) != adapted.omega or pullback_to_slice(H, zero).on(chart.variables) != adapted.hamiltonian:
            raise AssertionError("zero-section pullback does not recover the system")
    ext = CoisotropicExtension(ambient, {p: 0 for p in ps}, zs, tuple(ps), images, adapted)
    return ext


def check_coisotropic(ext, *, samples=64, seed=0):
    """Number of sample points where ``(T M)^perp`` lies in ``T M`` (all of them on success)."""
    import random

    from .presymp import random_point

    E = ext.ambient.chart
    n = E.dim
    tm = Subspace(n, [[int(i == j) for j in range(n)] for i, x in enumerate(E.coords)
                      if x not in ext.momenta])
    rng = random.Random(seed)
    good = 0
    for _ in range(samples):
        pt = random_point(E, rng, ext.ambient.parameter_values)
        for p in ext.momenta:
            pt[p] = Fraction(0)
        W = perp(pointwise(ext.ambient.omega, pt), tm)
        if W <= tm:
            good += 1
    return good


# ---------------------------------------------------------------------------
# route equivalence


@dataclass
class RouteReport:
    results: dict  # route -> {"quotient_dim", "reduced_rank", "symplectic"}
    agree: bool
    kernel_span: str
    base_point: dict

    def to_dict(self):
        return {
            "schema": 1,
            "routes": self.results,
            "agree": self.agree,
            "kernel_span": self.kernel_span,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self):
        lines = [f"{'route':<24}{'quotient':>9}{'rank':>6}  symplectic"]
        for name, r in self.results.items():
            lines.append(f"{name:<24}{r['quotient_dim']:>9}{r['reduced_rank']:>6}  "
                         f"{str(r['symplectic']).lower()}")
        lines.append(f"agree: {str(self.agree).lower()}  (kernel inside generator span: "
                     f"{self.kernel_span})")
        return "\n".join(lines) + "\n"


def _summary(lr):
    q = lr.N.dim - lr.N_cap_S.dim
    r = lr.N.dim - lr.kernel_of_alpha_N.dim
    return {"quotient_dim": q, "reduced_rank": r, "symplectic": q == r}


def route_equivalence(sys, mm, mu, base_point=None, *, seed=0):
    """Complete reduction (A), gauge then symplectic reduction (B) and
    coisotropic extension then symplectic reduction (C), compared at one point.

    B and C are carried out on the tangent space at the base point: B
    quotients ``T_xM`` by ``ker Omega_x`` and reduces by the projected
    generators; C adds one momentum per kernel direction and reduces by the
    generators lifted to the zero section.
    """
    A = reduce(sys, mm, mu, base_point, seed=seed)
    point = A.base_point
    form, T, S = _pointwise_data(sys, mm.action.fields, point)
    m = form.dim
    K = kernel(form) if m else Subspace(0)
    # B: adapted basis (complement | kernel); projected generators keep the complement part
    comp = K.complement_coordinates() if m else []
    basis = [list(v) for v in comp] + [list(v) for v in K.basis]
    c = len(comp)
    coords = _coords_in_basis(basis, m)
    wbar = _restrict_to(form, comp)
    proj = [coords(v)[:c] for v in S.basis]
    SB = Subspace(c, proj)
    results = {"complete": {"quotient_dim": A.quotient_dim, "reduced_rank": A.reduced_rank,
                            "symplectic": A.symplectic}}
    results["gauge-then-symplectic"] = _summary(linear_reduce(wbar, SB)) if c >= 2 else {
        "quotient_dim": c - SB.dim, "reduced_rank": 0, "symplectic": c == SB.dim}
    # C: W = complement (+) kernel (+) momenta, omega_b = wbar (+) sum dz_j ^ dp_j
    k = len(K.basis)
    W = c + 2 * k
    comps = {}
    for idx, v in wbar.components.items():
        comps[idx] = v
    for j in range(k):
        comps[(c + j, c + k + j)] = 1
    wb = LinForm(W, 2, comps)
    lifted = [list(coords(v)) + [0] * k for v in S.basis]
    SC = Subspace(W, lifted)
    results["coisotropic"] = _summary(linear_reduce(wb, SC))
    keys = ("quotient_dim", "reduced_rank")
    agree = all(
        tuple(r[x] for x in keys) == tuple(results["complete"][x] for x in keys)
        for r in results.values()
    )
    return RouteReport(results, agree, A.kernel_span.verdict, point)


def _coords_in_basis(basis, m):
    """Function returning the coordinates of a vector in a basis of Q^m."""
    n = len(basis)
    M = [[basis[j][i] for j in range(n)] for i in range(m)]

    def coords(v):
        (x,), (res,) = _elim.solve(M, [list(v)])
        if any(res):
            raise ValueError("vector outside the span")
        return x

    return coords


def _restrict_to(form, vectors):
    from .linred import _restrict_to_vectors

    return _restrict_to_vectors(form, vectors)


# ---------------------------------------------------------------------------
# time-extended systems


class TimeExtendedSystem(PresympSystem):
    """``(P x R, tau* omega_P + dt ^ dh, 0)`` remembering ``omega_P`` and ``h``."""

    def __init__(self, chart, omega, *, omega_P, h, time, name=None, parameter_values=None):
        super().__init__(chart, omega, 0, name=name, parameter_values=parameter_values)
        self.omega_P = omega_P
        self.h = h
        self.time = time


def build_time_extended(omega_P, h, *, time="t", name=None):
    """Time-extended system with ``i(d/dt) Omega_h = dh`` for time-independent ``h``."""
    P = omega_P.chart
    if time in P.variables:
        raise ValueError(f"{time!r} is already a chart variable")
    chart = Chart(name or f"{P.name}xR", P.coords + (time,) + P.parameters, P.parameters, P.laurent)
    h = h.on(chart.variables) if isinstance(h, Poly) else chart.poly(h)
    if exterior_derivative(omega_P) if P.dim > 2 else False:
        raise ValueError("omega_P is not closed")
    omega = omega_P.on(chart) + (DiffForm.differential(chart, time)
                                 ^ exterior_derivative(DiffForm.function(chart, h)))
    return TimeExtendedSystem(chart, omega, omega_P=omega_P.on(chart), h=h, time=time,
                              name=name or chart.name)


def time_extended_flow(sys):
    """The kernel field ``d/dt + Y`` with ``i(Y) omega_P = -d_P h``."""
    chart = sys.chart
    dh = exterior_derivative(DiffForm.function(chart, sys.h))
    t_idx = chart.index(sys.time)
    spatial = DiffForm.from_terms(chart, 1, [((i,), -c) for (i,), c in dh.components.items() if i != t_idx])
    base = PresympSystem(chart, sys.omega_P, rank_samples=0)
    Y, residuals = _solve_interior(base, spatial)
    if residuals:
        raise NotCompatible("omega_P cannot be solved for the time-extended flow")
    X = Y + VectorField.coordinate(chart, sys.time)
    if interior(X, sys.omega):
        raise AssertionError("time-extended flow is not in the kernel")
    return X


# ---------------------------------------------------------------------------
# non-compatible systems


@dataclass
class MomentumExtension:
    hamiltonians: tuple  # on the ambient chart
    hypotheses: dict  # generator -> True / reason string
    level_sets_equal: bool
    restriction_holds: bool
    level: ConstraintSet

    @property
    def certified(self):
        return self.level_sets_equal and self.restriction_holds


def extend_momentum_noncompatible(ambient, report, mm, *, mu=None, kernel_pairing=None,
                                  strict=True, seed=0):
    """Extend a momentum map on the final system to the ambient system.

    Generators with a non-constant Hamiltonian keep it (lifted to the
    ambient chart); kernel generators take the ambient function named in
    ``kernel_pairing`` (default: their constant).  Each extended function is
    checked to be Hamiltonian on the ambient system with a field tangent to
    the final constraint set; ``strict`` turns a failed check into an error.
    """
    P = ambient.chart
    kernel_pairing = kernel_pairing or {}
    final = report.final.on(P)
    if report.final.sampler is not None:
        final.sampler = report.final.sampler
    mu = [Fraction(0)] * len(mm.hamiltonians) if mu is None else [Fraction(m) for m in mu]
    hams, hyps = [], {}
    for name, f in zip(mm.action.names, mm.hamiltonians):
        if f.is_constant() and name in kernel_pairing:
            g = P.poly(kernel_pairing[name])
        else:
            g = f.on(P.variables)
        hams.append(g)
        fam = hamiltonian_vector_field(ambient, g) if not g.is_constant() else True
        if fam is None:
            hyps[name] = f"{g} has no Hamiltonian vector field on the ambient system"
        elif fam is True:
            hyps[name] = True
        else:
            X = fam.particular
            bad = [z for z in final.constraints
                   if X(z) and not vanishes_on(X(z), final, seed=seed, fixed=ambient.parameter_values)]
            hyps[name] = True if not bad else f"Hamiltonian field of {g} is not tangent to the final set"
        if strict and hyps[name] is not True:
            raise ExtensionHypothesisError(hyps[name])
    restriction = all(
        not (g - f.on(P.variables)) or bool(vanishes_on(g - f.on(P.variables), final, seed=seed,
                                                        fixed=ambient.parameter_values))
        for g, f in zip(hams, mm.hamiltonians)
    )
    polys = []
    for g, m in zip(hams, mu):
        if g.is_constant():
            if g.constant_value() != m:
                raise NotWeaklyRegular("mu conflicts with a constant extended Hamiltonian")
            continue
        polys.append(g - m)
    level_P = ConstraintSet(P, polys, sampler=final.sampler)
    level_M = list(level_set(mm, mu, check_regular=False).constraints)
    level_M = [z.on(P.variables) for z in level_M] + list(final.constraints)
    level_M_set = ConstraintSet(P, level_M, sampler=final.sampler)
    forward = all(vanishes_on(z, level_M_set, seed=seed, fixed=ambient.parameter_values) for z in polys)
    backward = all(vanishes_on(z, level_P, seed=seed, fixed=ambient.parameter_values) for z in level_M)
    return MomentumExtension(tuple(hams), hyps, forward and backward, restriction, level_P)
