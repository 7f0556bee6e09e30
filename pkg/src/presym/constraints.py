"""Constraint sets on a chart, membership certificates and on-constraint sampling.

A :class:`ConstraintSet` is a list of polynomials cut out of a chart.  A
constraint is *solvable* when it has the shape ``a*x + r`` with ``a`` a unit
(nonzero constant times a parameter monomial) and ``r`` free of ``x``; the
set is then partly a graph over the remaining coordinates and can be
substituted away exactly.  Membership of a polynomial in the constraint
ideal is certified by explicit cofactors; when the search fails the caller
may fall back to evaluating at sampled points on the constraint set.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
import random

from . import _elim
from .cartan import DiffForm, VectorField, exterior_derivative, wedge
from .linred import Subspace
from .symexpr import Poly

__all__ = [
    "ConstraintSet",
    "IdealReduction",
    "NoSampler",
    "ideal_reduce",
    "vanishes_on",
    "pullback_to_slice",
    "restrict_field_to_slice",
    "random_rational",
]

SAMPLE_COUNT = 64


class NoSampler(RuntimeError):
    """No way to produce exact points on the constraint set."""


class UnsolvableConstraint(ValueError):
    """An operation needs every constraint to be a graph over the other coordinates."""


def random_rational(rng, size=9, nonzero=True):
    while True:
        value = Fraction(rng.randint(-size, size), rng.randint(1, 4))
        if value or not nonzero:
            return value


def _split_linear(p, name, units):
    """Return (a, r) with p = a*name + r when a is a unit and r is free of name."""
    if p.degree_in(name) != 1:
        return None
    lowest = min(e[p.variables.index(name)] for e, _ in p.terms())
    if lowest < 0:
        return None
    a = p.coefficient(name, 1)
    if not a.is_unit(units):
        return None
    r = p - a * Poly.var(p.variables, name)
    return a, r


@dataclass(frozen=True)
class _Elimination:
    constraint: int  # index into the constraint list
    var: str
    unit: Poly  # reduced constraint = unit * (var - value)
    value: Poly  # free of every eliminated variable


class ConstraintSet:
    """Constraints ``zeta_i = 0`` on ``chart``.

    ``nondynamical`` optionally flags constraints that arose from a
    second-order condition rather than from the dynamics itself.
    ``sampler`` is a callable ``sampler(rng) -> point`` returning exact points
    on the set (used for constraints that are not graphs).
    """

    def __init__(self, chart, constraints=(), *, sampler=None, nondynamical=None,
                 labels=None):
        polys = []
        for c in constraints:
            p = chart.poly(c)
            if p.is_zero():
                raise ValueError("constraints must be nonzero")
            polys.append(p)
        self.chart = chart
        self.constraints = tuple(polys)
        self.sampler = sampler
        self.nondynamical = tuple(nondynamical or (False,) * len(polys))
        self.labels = tuple(labels or ())
        self._triangularize()

    # solvability -----------------------------------------------------------

    def _triangularize(self):
        """Gauss-Jordan on the solvable constraints.

        Each constraint is reduced by the solvable ones; ``_reps[k]`` writes the
        reduced constraint ``_reduced[k]`` as a combination of the originals.
        """
        chart = self.chart
        V = chart.variables
        m = len(self.constraints)
        units = chart.laurent
        E = list(self.constraints)
        T = [[Poly.const(V, int(i == k)) for i in range(m)] for k in range(m)]
        pivots = []
        used = set()
        for i in range(m):
            z = E[i]
            if z.is_zero():
                continue
            for x in chart.coords:
                if x in used:
                    continue
                split = _split_linear(z, x, units)
                if split is None:
                    continue
                a, r = split
                a_inv = a.inverse()
                value = -(r * a_inv)
                for k in range(m):
                    if k == i or not E[k].depends_on(x):
                        continue
                    q = _synthetic_cofactor(E[k], x, value) * a_inv
                    E[k] = E[k].subs({x: value})
                    T[k] = [tk - q * ti for tk, ti in zip(T[k], T[i])]
                pivots.append((i, x, a))
                used.add(x)
                break
        elims = []
        for i, x, a in pivots:
            xv = Poly.var(V, x)
            value = -((E[i] - a * xv) * a.inverse())
            elims.append(_Elimination(i, x, a, value))
        self._eliminations = tuple(elims)
        self._reduced = tuple(E)
        self._reps = tuple(tuple(t) for t in T)

    @property
    def solvable_vars(self):
        """{constraint index: variable it isolates}."""
        return {e.constraint: e.var for e in self._eliminations}

    @property
    def solutions(self):
        """{variable: expression in the remaining coordinates}."""
        return {e.var: e.value for e in self._eliminations}

    def all_solvable(self):
        return len(self._eliminations) == len(self.constraints)

    def __len__(self):
        return len(self.constraints)

    def __iter__(self):
        return iter(self.constraints)

    def __eq__(self, other):
        if not isinstance(other, ConstraintSet):
            return NotImplemented
        return self.chart == other.chart and self.constraints == other.constraints

    def __hash__(self):
        return hash((self.chart, self.constraints))

    def __repr__(self):
        return f"ConstraintSet({[str(c) for c in self.constraints]})"

    def with_constraints(self, more, nondynamical=False):
        more = [self.chart.poly(m) for m in more]
        return ConstraintSet(
            self.chart,
            self.constraints + tuple(more),
            sampler=self.sampler,
            nondynamical=self.nondynamical + (nondynamical,) * len(more),
        )

    def on(self, chart, sampler=None):
        return ConstraintSet(
            chart,
            [c.on(chart.variables) for c in self.constraints],
            sampler=sampler if sampler is not None else self.sampler,
            nondynamical=self.nondynamical,
        )

    def substitute(self, p):
        """Replace every solvable variable in ``p`` by its solution."""
        sol = self.solutions
        return p.subs(sol) if sol else p

    @property
    def dimension(self):
        """Expected dimension: chart dimension minus the number of constraints."""
        return self.chart.dim - len(self.constraints)

    # sampling ---------------------------------------------------------------

    def sample_points(self, count=SAMPLE_COUNT, seed=0, fixed=None, tries=200):
        """``count`` exact rational points on the set (parameters included).

        Uses the sampler hook when present; otherwise assigns random values and
        solves each constraint for a variable in which it is linear.
        """
        rng = random.Random(seed)
        fixed = dict(fixed or {})
        points = []
        attempts = 0
        while len(points) < count:
            attempts += 1
            if attempts > tries + count:
                raise NoSampler(
                    f"could not produce on-constraint points for {self!r}; "
                    "provide a sampler hook"
                )
            if self.sampler is not None:
                point = dict(self.sampler(rng))
                for k, v in fixed.items():
                    if k in point and point[k] != v:
                        raise NoSampler("sampler hook ignores fixed parameter values")
                    point.setdefault(k, v)
                for v in self.chart.variables:
                    if v not in point:
                        point[v] = random_rational(rng)
            else:
                point = self._linear_sample(rng, fixed)
                if point is None:
                    continue
            if all(c.evaluate(point) == 0 for c in self.constraints):
                points.append(point)
            elif self.sampler is not None:
                raise NoSampler("sampler hook returned a point off the constraint set")
        return points

    def _linear_sample(self, rng, fixed):
        chart = self.chart
        point = {v: fixed[v] if v in fixed else random_rational(rng) for v in chart.variables}
        solved = set()
        for i, zeta in enumerate(self.constraints):
            earlier = self.constraints[:i]
            done = False
            for x in chart.coords:
                if x in solved or x in fixed:
                    continue
                if zeta.degree_in(x) != 1:
                    continue
                if any(e.depends_on(x) for e in earlier):
                    continue
                rest = {k: v for k, v in point.items() if k != x}
                z = zeta.partial_evaluate(rest)
                a = z.coefficient(x, 1).constant_value()
                if not a:
                    continue
                b = z.coefficient(x, 0).constant_value()
                point[x] = -b / a
                solved.add(x)
                done = True
                break
            if not done:
                if zeta.evaluate(point) != 0:
                    return None
        return point

    # regularity -----------------------------------------------------------

    def jacobian(self, point):
        return [
            [c.diff(x).evaluate(point) for x in self.chart.coords] for c in self.constraints
        ]

    def tangent_space(self, point):
        """Tangent space of the constraint set at ``point`` (Jacobian null space)."""
        n = self.chart.dim
        if not self.constraints:
            return Subspace.whole(n)
        return Subspace(n, _elim.nullspace(self.jacobian(point), n))

    def is_regular_at(self, point):
        return _elim.rank(self.jacobian(point)) == len(self.constraints)

    def check_regular(self, points):
        """Indices of points where the differentials are dependent."""
        return [k for k, p in enumerate(points) if not self.is_regular_at(p)]


# ---------------------------------------------------------------------------
# ideal membership


@dataclass(frozen=True)
class IdealReduction:
    """Outcome of :func:`ideal_reduce`.

    ``certificate`` (when present) holds cofactors with
    ``p == sum(c_i * zeta_i)`` exactly, aligned with ``C.constraints``.
    """

    remainder: Poly
    certificate: tuple | None
    verdict: str  # "certified", "unknown"

    @property
    def certified(self):
        return self.certificate is not None


def _synthetic_cofactor(p, x, value):
    """Q with p - p(x=value) == (x - value) * Q."""
    V = p.variables
    xv = Poly.var(V, x)
    q = Poly.zero(V)
    for k, pk in p.coefficients_in((x,)).items():
        k = k[0]
        if k <= 0:
            continue
        acc = Poly.zero(V)
        for j in range(k):
            acc = acc + xv ** j * value ** (k - 1 - j)
        q = q + pk * acc
    return q


def _eliminate(p, C):
    """Substitute the solvable constraints; return (remainder, cofactors on C)."""
    V = p.variables
    cof = [Poly.zero(V) for _ in C.constraints]
    current = p
    for e in C._eliminations:
        if not current.depends_on(e.var):
            continue
        # current - next = (x - value) q, and reduced_i = unit * (x - value)
        q = _synthetic_cofactor(current, e.var, e.value) * e.unit.inverse()
        current = current.subs({e.var: e.value})
        for k, t in enumerate(C._reps[e.constraint]):
            if t:
                cof[k] = cof[k] + q * t
    return current, cof


def _clear_negative(p, laurent):
    """Multiply by a parameter monomial so no exponent is negative."""
    V = p.variables
    shift = {}
    for exps, _ in p.terms():
        for v, e in zip(V, exps):
            if e < 0:
                shift[v] = max(shift.get(v, 0), -e)
    if not shift:
        return p, Poly.const(V, 1)
    m = Poly.monomial(V, shift)
    return p * m, m


def _monomials(nvars, bound):
    out = []
    for deg in range(bound + 1):
        for combo in combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def _cofactor_search(q, gens, bound):
    """Find h_j of degree <= bound with q == sum h_j gens_j, or None."""
    V = q.variables
    used = set(q.used_variables())
    for g in gens:
        used.update(g.used_variables())
    active = [i for i, v in enumerate(V) if v in used]
    monos = _monomials(len(active), bound)

    def lift(e):
        full = [0] * len(V)
        for i, k in zip(active, e):
            full[i] = k
        return tuple(full)

    columns = []
    rows = {}
    for j, g in enumerate(gens):
        gt = g.term_dict()
        for m in monos:
            col = len(columns)
            columns.append((j, lift(m)))
            mf = lift(m)
            for exps, c in gt.items():
                key = tuple(a + b for a, b in zip(exps, mf))
                rows.setdefault(key, {})[col] = c
    qt = q.term_dict()
    for key in qt:
        rows.setdefault(key, {})
    keys = sorted(rows)
    sol = _elim.sparse_solve([rows[k] for k in keys], [qt.get(k, 0) for k in keys])
    if sol is None:
        return None
    hs = [{} for _ in gens]
    for col, val in sol.items():
        j, m = columns[col]
        hs[j][m] = val
    return [Poly(V, h) for h in hs]


def ideal_reduce(p, C, cofactor_degree_bound=None):
    """Reduce ``p`` modulo the constraints of ``C`` and try to certify membership."""
    p = C.chart.poly(p)
    V = p.variables
    rem, cof = _eliminate(p, C)
    if rem.is_zero():
        return _finish(p, C, rem, cof)
    solvable_idx = set(C.solvable_vars)
    reduced = [
        (i, C._reduced[i], C._reps[i])
        for i in range(len(C.constraints))
        if i not in solvable_idx and C._reduced[i]
    ]
    if not reduced:
        return IdealReduction(rem, None, "unknown")
    q_clear, mq = _clear_negative(rem, C.chart.laurent)
    cleared = []
    for i, r, c in reduced:
        if r:
            rc, m = _clear_negative(r, C.chart.laurent)
            cleared.append((i, r, c, rc, m))
    if cofactor_degree_bound is None:
        cofactor_degree_bound = max(
            0, q_clear.total_degree() - min(x[3].total_degree() for x in cleared)
        )
    hs = _cofactor_search(q_clear, [x[3] for x in cleared], cofactor_degree_bound)
    if hs is None:
        return IdealReduction(rem, None, "unknown")
    inv_mq = mq.inverse()
    # rem = sum h_j * m_j / mq * r_j, and r_j = sum_k rep_jk zeta_k
    for h, (i, r, rep, rc, m) in zip(hs, cleared):
        if not h:
            continue
        factor = h * m * inv_mq
        for k, t in enumerate(rep):
            if t:
                cof[k] = cof[k] + factor * t
    return _finish(p, C, Poly.zero(V), cof)


def _finish(p, C, rem, cof):
    total = Poly.zero(p.variables)
    for c, z in zip(cof, C.constraints):
        if c:
            total = total + c * z
    if total != p:
        raise AssertionError("cofactor certificate failed to recombine")
    return IdealReduction(rem, tuple(cof), "certified")


@dataclass(frozen=True)
class Vanishing:
    """Verdict of :func:`vanishes_on`: ``"certified"``, ``"sampled"`` or ``"fails"``."""

    verdict: str
    certificate: tuple | None = None
    witness: dict | None = None
    value: Fraction | None = None

    def __bool__(self):
        return self.verdict in ("certified", "sampled")


def vanishes_on(p, C, *, escalate=2, samples=SAMPLE_COUNT, seed=0, fixed=None):
    """Decide whether ``p`` vanishes on the set cut out by ``C``.

    Tries certificates with the default cofactor bound and up to ``escalate``
    larger bounds, then falls back to evaluation at sampled points.
    """
    p = C.chart.poly(p)
    if p.is_zero():
        return Vanishing("certified", tuple(Poly.zero(p.variables) for _ in C.constraints))
    if not C.constraints:
        return _sample_verdict(p, C, samples, seed, fixed, exact_only=True)
    red = ideal_reduce(p, C)
    if red.certified:
        return Vanishing("certified", red.certificate)
    base = None
    for extra in range(1, escalate + 1):
        if base is None:
            rem = red.remainder
            gens = [C.substitute(c) for c in C.constraints]
            degs = [g.total_degree() for g in gens if g]
            base = max(0, rem.total_degree() - min(degs)) if degs else 0
        red2 = ideal_reduce(p, C, base + extra)
        if red2.certified:
            return Vanishing("certified", red2.certificate)
    return _sample_verdict(red.remainder, C, samples, seed, fixed)


def _sample_verdict(p, C, samples, seed, fixed, exact_only=False):
    if exact_only:
        # no constraints: p vanishes on the chart only if it is the zero polynomial
        return Vanishing("fails", witness={}, value=None)
    try:
        points = C.sample_points(samples, seed=seed, fixed=fixed)
    except NoSampler:
        return Vanishing("fails", witness=None, value=None)
    for pt in points:
        v = p.evaluate(pt)
        if v:
            return Vanishing("fails", witness=pt, value=v)
    return Vanishing("sampled")


# ---------------------------------------------------------------------------
# slices


def _slice_chart(C):
    if not C.all_solvable():
        bad = [
            str(c) for i, c in enumerate(C.constraints) if i not in C.solvable_vars
        ]
        raise UnsolvableConstraint(
            f"constraints {bad} are not graphs over the remaining coordinates; "
            "use on-constraint sampling instead"
        )
    solved = [e.var for e in C._eliminations]
    return C.chart.without(solved), solved


def pullback_to_slice(obj, C, chart=None):
    """Pull a Poly or DiffForm back to the slice cut out by solvable constraints."""
    if chart is None:
        chart, solved = _slice_chart(C)
    else:
        _, solved = _slice_chart(C)
    sol = C.solutions
    if isinstance(obj, Poly):
        return obj.subs(sol).on(chart.variables)
    if isinstance(obj, DiffForm):
        old = obj.chart
        images = {}
        for x in old.coords:
            if x in sol:
                images[x] = exterior_derivative(DiffForm.function(old, sol[x]))
            else:
                images[x] = DiffForm.differential(old, x)
        total = DiffForm.zero(old, obj.degree)
        for idx, c in obj.components.items():
            term = DiffForm.function(old, c.subs(sol))
            for i in idx:
                term = wedge(term, images[old.coords[i]])
            total = total + term
        return total.on(chart)
    raise TypeError(f"cannot pull back {type(obj).__name__}")


def restrict_field_to_slice(X, C, chart=None):
    """Slice components of a vector field tangent to the slice."""
    if chart is None:
        chart, solved = _slice_chart(C)
    sol = C.solutions
    comps = {
        k: c.subs(sol).on(chart.variables)
        for k, c in X.components.items()
        if k in chart.coords
    }
    return VectorField(chart, comps)
