"""Constraint stabilization, gauge vector fields and gauge reduction.

:func:`stabilize` looks for vector fields ``X`` with ``i(X) omega = dH`` on
a submanifold where ``X`` is also tangent.  The general solution is written
``X = X_p + sum_a c_a Z_a`` with ``Z_a`` a basis of the (constant) kernel and
``c_a`` fresh parameters; tangency residues then either fix parameters or
produce new constraints, one generation at a time.
"""

from dataclasses import dataclass, field
import json

from .cartan import DiffForm, exterior_derivative, interior
from .constraints import (
    ConstraintSet,
    pullback_to_slice,
    vanishes_on,
)
from .presymp import (
    NonConstantForm,
    PresympSystem,
    SolutionFamily,
    _solve_interior,
    kernel_distribution,
)

__all__ = [
    "BifurcationError",
    "GenerationCapExceeded",
    "NotCompatible",
    "Generation",
    "StabilizationReport",
    "stabilize",
    "gauge_fields",
    "gauge_reduce",
    "adapt_kernel_coordinates",
]

GENERATION_CAP = 10
SCHEMA_VERSION = 1


class BifurcationError(RuntimeError):
    """A parameter coefficient vanishes on part of the constraint set."""


class GenerationCapExceeded(RuntimeError):
    pass


class NotCompatible(ValueError):
    """Some kernel field does not annihilate the Hamiltonian."""


@dataclass
class Generation:
    index: int
    constraints: list = field(default_factory=list)
    nondynamical: list = field(default_factory=list)
    fixings: dict = field(default_factory=dict)


def _ambient_kernel(sys):
    if sys.constraints is None or not len(sys.constraints):
        return kernel_distribution(sys)
    return kernel_distribution(PresympSystem(sys.chart, sys.omega, rank_samples=0))


def _fresh_names(chart, kernel):
    taken = set(chart.variables)
    names = []
    for k, Z in enumerate(kernel, start=1):
        comps = Z.components
        base = f"c_{next(iter(comps))}" if len(comps) == 1 and next(iter(comps.values())) == 1 else f"c{k}"
        name = base
        while name in taken:
            name += "_"
        taken.add(name)
        names.append(name)
    return names


def _split(R, free):
    """``R = r0 + sum r_a c_a``; returns (r0, {c_a: r_a})."""
    if not free:
        return R, {}
    parts = R.coefficients_in(free)
    zero = tuple(0 for _ in free)
    r0 = parts.pop(zero, R.zero(R.variables))
    lin = {}
    for key, coef in parts.items():
        if sum(key) != 1:
            raise AssertionError("tangency residue is not linear in the parameters")
        lin[free[key.index(1)]] = coef
    return r0, lin


@dataclass
class StabilizationReport:
    """Outcome of :func:`stabilize`.

    ``generations[0]`` holds the constraints the system arrived with (often
    empty); later generations list new constraints and the parameter fixings
    made while checking tangency of that generation's constraints.
    """

    name: str
    chart: object
    extended_chart: object
    sode: bool
    generations: list
    sode_fixings: dict
    final: ConstraintSet
    family: SolutionFamily
    verification: list
    weak_verdicts: list

    @property
    def free_parameters(self):
        return list(self.family.free_parameter_names)

    @property
    def constraints(self):
        return list(self.final.constraints)

    @property
    def final_dim(self):
        return self.chart.dim - len(self.final)

    @property
    def nondynamical_count(self):
        return sum(self.final.nondynamical)

    def generation_constraints(self):
        """Constraint lists of the generations that added constraints."""
        return [g.constraints for g in self.generations if g.constraints]

    def final_system(self, sys):
        """The system restricted to the final constraint set.

        A graph-like set gives a pulled-back system on the slice chart;
        otherwise the ambient data is kept together with the constraint set.
        """
        if not len(self.final):
            return sys
        C = self.final.on(sys.chart)
        if C.all_solvable():
            omega = pullback_to_slice(sys.omega, C)
            H = pullback_to_slice(sys.hamiltonian, C)
            return PresympSystem(
                omega.chart, omega, H, name=f"{sys.name}/final",
                parameter_values=sys.parameter_values,
            )
        return PresympSystem(
            sys.chart, sys.omega, sys.hamiltonian, constraints=C,
            name=f"{sys.name}/final", parameter_values=sys.parameter_values,
        )

    def to_dict(self):
        n = self.chart.dim
        gens = []
        count = 0
        for g in self.generations:
            count += len(g.constraints)
            gens.append({
                "index": g.index,
                "constraints": [str(c) for c in g.constraints],
                "nondynamical": list(g.nondynamical),
                "fixings": {k: str(v) for k, v in g.fixings.items()},
                "dimension": n - count,
            })
        X = self.family.particular
        return {
            "schema": SCHEMA_VERSION,
            "system": self.name,
            "sode": self.sode,
            "chart": list(self.chart.coords),
            "parameters": list(self.chart.parameters),
            "generations": gens,
            "sode_fixings": {k: str(v) for k, v in self.sode_fixings.items()},
            "final": {
                "constraints": [str(c) for c in self.final.constraints],
                "nondynamical": list(self.final.nondynamical),
                "dimension": self.final_dim,
            },
            "solution": {
                "particular": {k: str(X[k]) for k in self.chart.coords if X[k]},
                "free_parameters": self.free_parameters,
                "kernel_basis": [str(Z) for Z in self.family.kernel_basis],
            },
            "verification": self.verification,
            "weak_verdicts": self.weak_verdicts,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self):
        n = self.chart.dim
        lines = [f"system {self.name}  (dim {n}, sode {'on' if self.sode else 'off'})"]
        if self.sode_fixings:
            fx = ", ".join(f"{k} = {v}" for k, v in self.sode_fixings.items())
            lines.append(f"second-order fixings: {fx}")
        header = f"{'gen':>3}  {'dim':>4}  constraints  |  fixings"
        lines.append(header)
        lines.append("-" * len(header))
        count = 0
        for g in self.generations:
            count += len(g.constraints)
            cons = ", ".join(
                f"{c}{' [nd]' if nd else ''}" for c, nd in zip(g.constraints, g.nondynamical)
            ) or "-"
            fx = ", ".join(f"{k} = {v}" for k, v in g.fixings.items()) or "-"
            lines.append(f"{g.index:>3}  {n - count:>4}  {cons}  |  {fx}")
        lines.append(f"final dimension {self.final_dim}")
        X = self.family.particular
        lines.append("solution:")
        for k in self.chart.coords:
            if X[k]:
                lines.append(f"  X^{k} = {X[k]}")
        free = ", ".join(self.free_parameters) or "none"
        lines.append(f"free parameters: {free}")
        for Z, c in zip(self.family.kernel_basis, self.free_parameters):
            lines.append(f"  {c} multiplies {Z}")
        if self.weak_verdicts:
            lines.append("weak (sampled) verdicts: " + "; ".join(self.weak_verdicts))
        return "\n".join(lines) + "\n"


class _State:
    def __init__(self, sys, sode_pairing, sampler, samples, seed):
        self.sys = sys
        chart = sys.chart
        kernel = _ambient_kernel(sys)
        names = _fresh_names(chart, kernel)
        E = chart.extend(names, parameters=True)
        self.base = chart
        self.E = E
        self.kernel = [Z.on(E) for Z in kernel]
        self.free = list(names)
        self.omega = sys.omega.on(E)
        self.H = sys.hamiltonian.on(E.variables)
        Xp, _ = _solve_interior(PresympSystem(chart, sys.omega, rank_samples=0),
                                exterior_derivative(DiffForm.function(chart, sys.hamiltonian)))
        X = Xp.on(E)
        for c, Z in zip(names, self.kernel):
            X = X + Z * E.var(c)
        self.X_gen = X
        self.sode_fixings = {}
        self.entries = []  # (poly on E, generation index, nondynamical)
        self.sampler = sampler
        self.samples = samples
        self.seed = seed
        self.weak = []
        self.fixed = dict(sys.parameter_values)

    @property
    def X(self):
        if not self.sode_fixings:
            return self.X_gen
        return self.X_gen.subs(self.sode_fixings)

    def constraint_set(self):
        return ConstraintSet(self.E, [p for p, _, _ in self.entries])

    def vanishes(self, p, what):
        C = self.constraint_set()
        if not len(C):
            return p.is_zero()
        v = vanishes_on(p, C, samples=self.samples, seed=self.seed, fixed=self.fixed)
        if v.verdict == "sampled":
            self.weak.append(f"{what}: {p}")
        return bool(v)

    def add(self, p, gen, nondynamical):
        if p.is_constant():
            raise NotCompatible(
                f"generation {gen} requires {p} = 0: the dynamics has no solution anywhere"
            )
        p = p.primitive()
        self.entries.append((p, gen, nondynamical))

    def fix(self, c, value):
        self.free.remove(c)
        self.X_gen = self.X_gen.subs({c: value})


def stabilize(sys, sode=False, sode_pairing=None, *, max_generations=GENERATION_CAP,
              sampler=None, samples=64, seed=0):
    """Run the constraint algorithm on ``sys``.

    ``sode_pairing`` maps each velocity coordinate to its position coordinate;
    with ``sode`` set, solutions are further required to be second order
    (``X(position) = velocity``).  Constraints the system already carries form
    generation 0.  ``sampler`` is attached to the final constraint set for
    on-constraint sampling.
    """
    if sode and not sode_pairing:
        raise ValueError("sode mode needs a velocity -> position pairing")
    st = _State(sys, sode_pairing, sampler, samples, seed)
    E = st.E
    gens = [Generation(0)]
    if sys.constraints is not None:
        for p, nd in zip(sys.constraints.constraints, sys.constraints.nondynamical):
            st.entries.append((p.on(E.variables), 0, nd))
            gens[0].constraints.append(p)
            gens[0].nondynamical.append(nd)

    def gen(k):
        while len(gens) <= k:
            gens.append(Generation(len(gens)))
        return gens[k]

    # compatibility: i(Z) dH = Z(H)
    for Z in st.kernel:
        p = Z(st.H)
        if p and not st.vanishes(p, "compatibility"):
            st.add(p, 1, False)

    if sode:
        for vel, pos in sode_pairing.items():
            if pos not in E.coords or vel not in E.coords:
                continue
            e = st.X[pos] - E.var(vel)
            r0, lin = _split(e, st.free)
            unit = next((c for c, r in lin.items() if r.is_unit(E.laurent)), None)
            if unit is not None:
                r = lin.pop(unit)
                value = -(r0 + sum((E.var(c) * rc for c, rc in lin.items()), E.zero())) * r.inverse()
                st.sode_fixings[unit] = value
                st.free.remove(unit)
            elif lin:
                raise BifurcationError(
                    f"second-order condition for {pos} has non-invertible parameter coefficients"
                )
            elif r0 and not st.vanishes(r0, "second-order"):
                st.add(r0, 1, True)

    for p, g, nd in st.entries:
        if g >= 1:
            gen(g).constraints.append(p)
            gen(g).nondynamical.append(nd)

    changed = True
    while changed:
        changed = False
        k = 0
        while k < len(st.entries):
            zeta, g, _ = st.entries[k]
            k += 1
            R_gen = st.X_gen(zeta)
            R = R_gen.subs(st.sode_fixings) if st.sode_fixings else R_gen
            r0, lin = _split(R, st.free)
            C = st.constraint_set()
            fixable = None
            live = {}
            for c, r in lin.items():
                r_red = C.substitute(r)
                if r_red.is_zero() or st.vanishes(r_red, f"coefficient of {c}"):
                    continue
                live[c] = r_red
                if fixable is None and r_red.is_unit(E.laurent):
                    fixable = c
            if fixable is not None:
                r = live.pop(fixable)
                rest = C.substitute(r0)
                for c, rc in live.items():
                    rest = rest + rc * E.var(c)
                value = -(rest * r.inverse())
                st.fix(fixable, value)
                gen(g).fixings[fixable] = value
                changed = True
                continue
            if live:
                raise BifurcationError(
                    f"tangency of {zeta} leaves parameters {sorted(live)} with "
                    "coefficients that vanish on part of the constraint set"
                )
            rem = C.substitute(r0)
            if rem.is_zero() or st.vanishes(rem, f"tangency of {zeta}"):
                continue
            nondyn = False
            if st.sode_fixings:
                _, lin_gen = _split(R_gen, list(st.free) + list(st.sode_fixings))
                nondyn = any(
                    c in st.sode_fixings and r.is_unit(E.laurent) for c, r in lin_gen.items()
                )
            if g + 1 > max_generations:
                raise GenerationCapExceeded(
                    f"no stable constraint set after {max_generations} generations"
                )
            st.add(rem, g + 1, nondyn)
            p = st.entries[-1][0]
            gen(g + 1).constraints.append(p)
            gen(g + 1).nondynamical.append(nondyn)
            changed = True

    final_polys = [p.on(st.base.variables) for p, _, _ in st.entries]
    final = ConstraintSet(
        st.base, final_polys, sampler=sampler,
        nondynamical=[nd for _, _, nd in st.entries],
    )
    X = st.X
    zero = {c: 0 for c in st.free}
    particular = X.subs(zero) if zero else X
    basis = tuple(X.map_coefficients(lambda p, c=c: p.diff(c)) for c in st.free)
    family = SolutionFamily(particular, basis, tuple(st.free), final)
    verification = _verify(st, X, final)
    for g in gens:
        g.constraints = [p.on(st.base.variables) for p in g.constraints]
    # drop empty trailing generations but keep generation 0 for the record
    while len(gens) > 1 and not gens[-1].constraints and not gens[-1].fixings:
        gens.pop()
    return StabilizationReport(
        name=sys.name,
        chart=st.base,
        extended_chart=E,
        sode=bool(sode),
        generations=gens,
        sode_fixings=dict(st.sode_fixings),
        final=final,
        family=family,
        verification=verification,
        weak_verdicts=st.weak,
    )


def _verify(st, X, final):
    """Check ``i(X) omega - dH`` and the tangency of every constraint on the final set."""
    E = st.E
    C = ConstraintSet(E, [p for p, _, _ in st.entries], sampler=st.sampler)
    residual = interior(X, st.omega) - exterior_derivative(DiffForm.function(E, st.H))
    out = []
    checks = [(f"equation d{E.coords[i]}", c) for (i,), c in sorted(residual.components.items())]
    checks += [(f"tangency {p}", X(p)) for p, _, _ in st.entries]
    for what, p in checks:
        if p.is_zero():
            continue
        v = vanishes_on(p, C, samples=st.samples, seed=st.seed, fixed=st.fixed) if len(C) else None
        if not v:
            raise AssertionError(f"solution family fails {what}: {p}")
        out.append(f"{what}: {v.verdict}")
        if v.verdict == "sampled":
            st.weak.append(f"{what}: {p}")
    return out


# ---------------------------------------------------------------------------
# gauge


def gauge_fields(sys):
    """Gauge directions of a (final) system.

    Unconstrained systems return :func:`kernel_distribution`.  On a
    constraint set the constant ambient kernel fields tangent to the set are
    returned (tangency certified or checked at on-constraint samples).
    """
    if sys.constraints is None or not len(sys.constraints):
        return kernel_distribution(sys)
    C = sys.constraints
    out = []
    for Z in _ambient_kernel(sys):
        if all(vanishes_on(Z(z), C, fixed=sys.parameter_values) for z in C.constraints):
            out.append(Z)
    return out


def adapt_kernel_coordinates(sys):
    """Linear change of coordinates making the constant kernel coordinate-spanned.

    With the kernel in echelon form ``k_i`` (pivot coordinate ``p_i``), new
    coordinates ``y`` satisfy ``x_j = y_j + sum_i k_i[j] y_{p_i}``; names are
    kept.  Returns ``(system in y-coordinates, images of the old coordinates,
    pivot names)``.
    """
    chart = sys.chart
    kernel = kernel_distribution(sys)
    pivots = []
    for Z in kernel:
        p = next(x for x in chart.coords if Z[x])
        pivots.append(p)
    images = {}
    for x in chart.coords:
        img = chart.var(x)
        if x not in pivots:
            for Z, p in zip(kernel, pivots):
                if Z[x]:
                    img = img + Z[x] * chart.var(p)
        images[x] = img
    diffs = {x: exterior_derivative(DiffForm.function(chart, img)) for x, img in images.items()}
    omega = DiffForm.zero(chart, 2)
    for idx, c in sys.omega.components.items():
        term = DiffForm.function(chart, c.subs(images))
        for i in idx:
            term = term ^ diffs[chart.coords[i]]
        omega = omega + term
    H = sys.hamiltonian.subs(images)
    new = PresympSystem(chart, omega, H, name=sys.name, rank_samples=0,
                        parameter_values=sys.parameter_values)
    return new, images, pivots


def gauge_reduce(sys):
    """Quotient by the kernel: drop the kernel coordinates.

    Requires a constant-coefficient, unconstrained, compatible system.  A
    kernel that is not coordinate-spanned is first straightened by
    :func:`adapt_kernel_coordinates`.
    """
    if sys.constraints is not None and len(sys.constraints):
        raise NonConstantForm("gauge_reduce needs an unconstrained system; pull back first")
    kernel = kernel_distribution(sys)
    if not kernel:
        return sys
    for Z in kernel:
        zh = Z(sys.hamiltonian)
        if zh:
            raise NotCompatible(f"kernel field {Z} does not annihilate H: {Z}(H) = {zh}")
    coordinate = all(len(Z.components) == 1 and next(iter(Z.components.values())) == 1
                     for Z in kernel)
    if not coordinate:
        sys, _, _ = adapt_kernel_coordinates(sys)
        kernel = kernel_distribution(sys)
    drop = [next(iter(Z.components)) for Z in kernel]
    for x in drop:
        if sys.hamiltonian.depends_on(x) or any(c.depends_on(x) for c in sys.omega.components.values()):
            raise NotCompatible(f"data depends on the kernel coordinate {x}")
    chart = sys.chart.without(drop, name=f"{sys.chart.name}/ker")
    omega = sys.omega.on(chart)
    H = sys.hamiltonian.on(chart.variables)
    reduced = PresympSystem(chart, omega, H, name=f"{sys.name}/ker",
                            parameter_values=sys.parameter_values, rank_samples=0)
    if kernel_distribution(reduced):
        raise AssertionError("gauge reduction left a nontrivial kernel")
    return reduced
