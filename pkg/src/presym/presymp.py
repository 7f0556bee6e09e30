"""Presymplectic systems ``(M, Omega, H)`` on a chart.

Global kernels and Hamiltonian vector fields are computed when ``Omega`` has
coefficients free of the dynamical coordinates (parameters allowed).  A
system may carry a :class:`~presym.constraints.ConstraintSet`, meaning it
lives on the submanifold those constraints cut out; form identities are
then checked on the ambient chart.
"""

from dataclasses import dataclass
import random

from . import _elim
from .cartan import (
    DiffForm,
    NotClosed,
    VectorField,
    exterior_derivative,
    integrate_closed_one_form,
    interior,
)
from .constraints import NoSampler, random_rational
from .linred import Subspace, form_rank, pointwise, restrict

__all__ = [
    "PresympSystem",
    "SolutionFamily",
    "NonConstantForm",
    "NotHamiltonian",
    "RankNotConstant",
    "Classification",
    "kernel_distribution",
    "hamiltonian_vector_field",
    "poisson_bracket",
    "classify",
    "random_point",
]

RANK_SAMPLES = 6


class NonConstantForm(ValueError):
    """The 2-form depends on the dynamical coordinates; only pointwise data is available."""


class NotHamiltonian(ValueError):
    """A function has no presymplectic Hamiltonian vector field."""


class RankNotConstant(ValueError):
    """The 2-form changes rank between sample points."""


def random_point(chart, rng, fixed=None):
    fixed = fixed or {}
    return {v: fixed[v] if v in fixed else random_rational(rng) for v in chart.variables}


class PresympSystem:
    """Closed 2-form ``omega`` and Hamiltonian ``hamiltonian`` on ``chart``.

    Construction checks ``d omega = 0`` and that the pointwise rank is the
    same at ``rank_samples`` random rational points (on the constraint set
    when ``constraints`` is given and points can be produced).
    """

    def __init__(self, chart, omega, hamiltonian=0, *, constraints=None, name=None,
                 rank_samples=RANK_SAMPLES, seed=0, parameter_values=None):
        if omega.degree != 2:
            raise ValueError("omega must be a 2-form")
        if omega.chart != chart:
            raise ValueError("omega lives on a different chart")
        if chart.dim > 2:
            domega = exterior_derivative(omega)
            if domega:
                idx = sorted(domega.components)[0]
                raise NotClosed(
                    f"omega is not closed: d(omega) has component "
                    f"{domega.components[idx]} {domega.basis_str(idx)}",
                    component=idx,
                )
        self.chart = chart
        self.omega = omega
        self.hamiltonian = chart.poly(hamiltonian)
        self.constraints = constraints
        self.name = name or chart.name
        self.parameter_values = dict(parameter_values or {})
        self.rank = self._sample_rank(rank_samples, seed) if rank_samples else None

    def _sample_rank(self, count, seed):
        rng = random.Random(seed)
        if self.constraints is not None and len(self.constraints):
            try:
                points = self.constraints.sample_points(
                    count, seed=seed, fixed=self.parameter_values
                )
            except NoSampler:
                return None
            ranks = {self.rank_at(p) for p in points}
        else:
            ranks = set()
            for _ in range(count):
                ranks.add(self.rank_at(random_point(self.chart, rng, self.parameter_values)))
        if len(ranks) > 1:
            raise RankNotConstant(f"omega has ranks {sorted(ranks)} at sample points")
        return ranks.pop() if ranks else None

    def tangent_space(self, point):
        if self.constraints is None or not len(self.constraints):
            return Subspace.whole(self.chart.dim)
        return self.constraints.tangent_space(point)

    def form_at(self, point):
        """Omega at ``point`` restricted to the tangent space of the system manifold.

        Returns ``(LinForm in tangent-basis coordinates, tangent Subspace)``.
        """
        T = self.tangent_space(point)
        return restrict(pointwise(self.omega, point), T), T

    def rank_at(self, point):
        form, _ = self.form_at(point)
        return form_rank(form) if form.dim else 0

    @property
    def dim(self):
        if self.constraints is None:
            return self.chart.dim
        return self.constraints.dimension

    def is_constant_coefficient(self):
        return self.omega.is_constant_coefficient()

    def with_hamiltonian(self, h):
        return PresympSystem(
            self.chart, self.omega, h, constraints=self.constraints, name=self.name,
            rank_samples=0, parameter_values=self.parameter_values,
        )

    def with_constraints(self, constraints, name=None):
        return PresympSystem(
            self.chart, self.omega, self.hamiltonian, constraints=constraints,
            name=name or self.name, rank_samples=0,
            parameter_values=self.parameter_values,
        )

    def __repr__(self):
        extra = f", {len(self.constraints)} constraints" if self.constraints else ""
        return f"PresympSystem({self.name!r}, dim={self.chart.dim}{extra})"


@dataclass(frozen=True)
class SolutionFamily:
    """``particular + sum_a c_a * kernel_basis[a]``.

    ``free_parameter_names`` name the coefficients ``c_a``; ``domain`` is the
    constraint set on which the defining equation holds (``None``: everywhere).
    """

    particular: VectorField
    kernel_basis: tuple = ()
    free_parameter_names: tuple = ()
    domain: object = None

    def member(self, coefficients):
        X = self.particular
        for c, Z in zip(coefficients, self.kernel_basis):
            X = X + Z * c
        return X

    def general(self):
        """The member with the free parameters kept symbolic (they must be chart parameters)."""
        chart = self.particular.chart
        return self.member([chart.var(n) for n in self.free_parameter_names])


def _omega_matrix(sys):
    if not sys.omega.is_constant_coefficient():
        raise NonConstantForm(
            "omega has coefficients depending on the dynamical coordinates; "
            "evaluate it at points with linred.pointwise instead"
        )
    return sys.omega.matrix()


def _ops(chart):
    return _elim.PolyOps(chart.variables, chart.laurent)


def kernel_distribution(sys):
    """Basis of constant vector fields spanning ``ker omega`` (echelon-canonical)."""
    if sys.constraints is not None and len(sys.constraints):
        raise NonConstantForm(
            "the system lives on a constraint set; use gotay.gauge_fields or pointwise data"
        )
    A = _omega_matrix(sys)
    chart = sys.chart
    n = chart.dim
    ops = _ops(chart)
    vectors = _elim.nullspace(A, n, ops)
    if vectors:
        rows, piv = _elim.rref(vectors, ops)
        vectors = rows[: len(piv)]
    out = []
    for v in vectors:
        X = VectorField(chart, {chart.coords[i]: c for i, c in enumerate(v) if c})
        if interior(X, sys.omega):
            raise AssertionError("kernel vector does not annihilate omega")
        out.append(X)
    return out


def _solve_interior(sys, alpha):
    """Particular X with i(X) omega = alpha, or (None, residuals)."""
    A = _omega_matrix(sys)
    chart = sys.chart
    n = chart.dim
    # (i(X) omega)_j = sum_i X^i A[i][j]  ->  rows j, columns i
    M = [[A[i][j] for i in range(n)] for j in range(n)]
    rhs = [alpha[(j,)] for j in range(n)]
    (x,), (res,) = _elim.solve(M, [rhs], _ops(chart))
    X = VectorField(chart, {chart.coords[i]: c for i, c in enumerate(x) if c})
    return X, [r for r in res if r]


def hamiltonian_vector_field(sys, f):
    """Family ``X_f + ker omega`` with ``i(X_f) omega = df``; ``None`` if none exists."""
    chart = sys.chart
    f = chart.poly(f)
    if chart.dim == 0:
        return SolutionFamily(VectorField(chart))
    df = exterior_derivative(DiffForm.function(chart, f))
    X, residuals = _solve_interior(sys, df)
    if residuals:
        return None
    if interior(X, sys.omega) != df:
        return None
    kernel = kernel_distribution(sys)
    names = tuple(f"k{i + 1}" for i in range(len(kernel)))
    return SolutionFamily(X, tuple(kernel), names)


def _require_family(sys, f):
    fam = hamiltonian_vector_field(sys, f)
    if fam is None:
        raise NotHamiltonian(f"{f} has no Hamiltonian vector field for this omega")
    return fam


def poisson_bracket(sys, f1, f2):
    """``{f1, f2} = omega(X_1, X_2) = i(X_2) i(X_1) omega``."""
    f1, f2 = sys.chart.poly(f1), sys.chart.poly(f2)
    fam1, fam2 = _require_family(sys, f1), _require_family(sys, f2)
    X1, X2 = fam1.particular, fam2.particular
    value = interior(X2, interior(X1, sys.omega)).scalar()
    if fam1.kernel_basis:
        Z = fam1.kernel_basis[0]
        for k, Zk in enumerate(fam1.kernel_basis[1:], start=2):
            Z = Z + Zk * k
        Y1 = X1 + Z
        Y2 = X2 + Z * 3
        other = interior(Y2, interior(Y1, sys.omega)).scalar()
        if other != value:
            raise AssertionError("Poisson bracket depends on the kernel representative")
    return value


@dataclass(frozen=True)
class Classification:
    """``kind`` is ``"kernel"``, ``"hamiltonian"`` or ``"none"``.

    On a star-shaped chart every locally Hamiltonian field is Hamiltonian;
    ``locally_hamiltonian`` records that the closedness test passed.
    """

    kind: str
    hamiltonian: object = None
    locally_hamiltonian: bool = False

    def __str__(self):
        if self.kind == "hamiltonian":
            return f"hamiltonian({self.hamiltonian})"
        return self.kind


def classify(sys, X):
    beta = interior(X, sys.omega)
    if beta.is_zero():
        return Classification("kernel", sys.chart.zero(), True)
    if sys.chart.dim < 2 or exterior_derivative(beta).is_zero():
        return Classification("hamiltonian", integrate_closed_one_form(beta), True)
    return Classification("none")
