"""Exact linear algebra of degenerate k-forms on Q^n and the linear reduction.

Given a k-form ``alpha`` on E = Q^n and a subspace S, :func:`linear_reduce`
computes ``N = perp(alpha, S)``, the restriction ``alpha_N``, its kernel, and
the nondegenerate form induced on ``N / ker alpha_N``.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from . import _elim
from .cartan import _sort_with_sign

__all__ = [
    "LinForm",
    "Subspace",
    "LinearReduction",
    "kernel",
    "perp",
    "restrict",
    "linear_reduce",
    "pointwise",
    "form_rank",
]


def _det(rows):
    """Determinant of a small square Fraction matrix."""
    n = len(rows)
    if n == 0:
        return Fraction(1)
    m = [list(r) for r in rows]
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if m[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            det = -det
        det *= m[c][c]
        inv = 1 / m[c][c]
        for r in range(c + 1, n):
            f = m[r][c] * inv
            if f:
                m[r] = [a - f * b for a, b in zip(m[r], m[c])]
    return det


class LinForm:
    """Alternating k-form on Q^n stored by strictly increasing index tuples."""

    __slots__ = ("dim", "degree", "components")

    def __init__(self, dim, degree, components=None):
        comps = {}
        for idx, v in (components or {}).items():
            sign, key = _sort_with_sign(tuple(idx))
            if not sign:
                continue
            if any(i < 0 or i >= dim for i in key) or len(key) != degree:
                raise ValueError(f"bad index {idx} for a {degree}-form on Q^{dim}")
            v = Fraction(v) * sign
            total = comps.get(key, 0) + v
            if total:
                comps[key] = total
            else:
                comps.pop(key, None)
        self.dim = dim
        self.degree = degree
        self.components = comps

    @classmethod
    def from_matrix(cls, matrix):
        n = len(matrix)
        for i in range(n):
            for j in range(n):
                if Fraction(matrix[i][j]) != -Fraction(matrix[j][i]):
                    raise ValueError("matrix is not antisymmetric")
        return cls(n, 2, {(i, j): matrix[i][j] for i in range(n) for j in range(i + 1, n)})

    def __getitem__(self, idx):
        sign, key = _sort_with_sign(tuple(idx))
        if not sign:
            return Fraction(0)
        return sign * self.components.get(key, Fraction(0))

    def matrix(self):
        if self.degree != 2:
            raise ValueError("matrix() needs a 2-form")
        m = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for (i, j), v in self.components.items():
            m[i][j] = v
            m[j][i] = -v
        return m

    def __call__(self, *vectors):
        """Value ``alpha(v_1, ..., v_k)``."""
        if len(vectors) != self.degree:
            raise ValueError(f"expected {self.degree} vectors")
        total = Fraction(0)
        for idx, v in self.components.items():
            total += v * _det([[vec[i] for i in idx] for vec in vectors])
        return total

    def contract(self, u):
        """``i(u) alpha`` as a (k-1)-form."""
        if self.degree == 0:
            raise ValueError("cannot contract a 0-form")
        out = {}
        for idx, v in self.components.items():
            for p, i in enumerate(idx):
                if u[i]:
                    key = idx[:p] + idx[p + 1:]
                    term = u[i] * v * (-1 if p % 2 else 1)
                    out[key] = out.get(key, 0) + term
        return LinForm(self.dim, self.degree - 1, out)

    def is_zero(self):
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, LinForm):
            return NotImplemented
        return (self.dim, self.degree, self.components) == (
            other.dim,
            other.degree,
            other.components,
        )

    def __repr__(self):
        return f"LinForm(dim={self.dim}, degree={self.degree}, {self.components})"


class Subspace:
    """Subspace of Q^n stored as the nonzero rows of a reduced echelon basis."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim, vectors=()):
        vectors = [[Fraction(x) for x in v] for v in vectors]
        for v in vectors:
            if len(v) != ambient_dim:
                raise ValueError("vector length does not match the ambient dimension")
        rows, pivots = _elim.rref(vectors) if vectors else ([], [])
        self.ambient_dim = ambient_dim
        self.basis = [tuple(r) for r in rows[: len(pivots)]]
        self.pivots = tuple(pivots)

    @classmethod
    def whole(cls, n):
        return cls(n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def span(cls, n, vectors):
        return cls(n, vectors)

    @property
    def dim(self):
        return len(self.basis)

    def __len__(self):
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash((self.ambient_dim, tuple(self.basis)))

    def __add__(self, other):
        self._check(other)
        return Subspace(self.ambient_dim, list(self.basis) + list(other.basis))

    def _check(self, other):
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("subspaces of different ambient spaces")

    def contains(self, v):
        v = [Fraction(x) for x in v]
        w = list(v)
        for row, p in zip(self.basis, self.pivots):
            f = w[p]
            if f:
                w = [a - f * b for a, b in zip(w, row)]
        return not any(w)

    __contains__ = contains

    def issubspace(self, other):
        self._check(other)
        return all(other.contains(v) for v in self.basis)

    def __le__(self, other):
        return self.issubspace(other)

    def intersection(self, other):
        """``self & other`` by solving sum a_i u_i = sum b_j w_j."""
        self._check(other)
        if not self.basis or not other.basis:
            return Subspace(self.ambient_dim)
        n = self.ambient_dim
        a, b = len(self.basis), len(other.basis)
        m = [
            [self.basis[i][r] for i in range(a)] + [-other.basis[j][r] for j in range(b)]
            for r in range(n)
        ]
        vectors = []
        for sol in _elim.nullspace(m, a + b):
            vectors.append(
                [sum(sol[i] * self.basis[i][r] for i in range(a)) for r in range(n)]
            )
        return Subspace(n, vectors)

    __and__ = intersection

    def coordinates(self, v):
        """Coordinates of ``v`` in the echelon basis (``v`` must lie in the span)."""
        v = [Fraction(x) for x in v]
        coords = [v[p] for p in self.pivots]
        rebuilt = [sum(c * row[r] for c, row in zip(coords, self.basis)) for r in range(self.ambient_dim)]
        if rebuilt != v:
            raise ValueError("vector is not in the subspace")
        return coords

    def embed(self, coords):
        """Ambient vector with the given basis coordinates."""
        return [
            sum((c * row[r] for c, row in zip(coords, self.basis)), Fraction(0))
            for r in range(self.ambient_dim)
        ]

    def complement_coordinates(self):
        """Standard basis vectors at the non-pivot columns (spans a complement)."""
        piv = set(self.pivots)
        n = self.ambient_dim
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n) if i not in piv]

    def __repr__(self):
        rows = ", ".join("(" + ", ".join(str(x) for x in r) + ")" for r in self.basis)
        return f"Subspace(n={self.ambient_dim}, dim={self.dim}, [{rows}])"


def _contraction_matrix(alpha):
    """Rows indexed by (k-1)-tuples J, columns by i: coefficient of u_i in (i(u)alpha)_J."""
    n, k = alpha.dim, alpha.degree
    rows = []
    for J in combinations(range(n), k - 1):
        row = [alpha[(i,) + J] for i in range(n)]
        if any(row):
            rows.append(row)
    return rows


def kernel(alpha):
    """``{v : i(v) alpha = 0}``."""
    n = alpha.dim
    if alpha.degree == 0:
        raise ValueError("kernel of a 0-form is undefined")
    return Subspace(n, _elim.nullspace(_contraction_matrix(alpha), n))


def form_rank(alpha):
    return alpha.dim - kernel(alpha).dim


def perp(alpha, S):
    """``{u : i(u) i(v) alpha = 0 for all v in S}``."""
    if S.ambient_dim != alpha.dim:
        raise ValueError("dimension mismatch between form and subspace")
    if alpha.degree < 2:
        raise ValueError("perp needs a form of degree >= 2")
    n = alpha.dim
    rows = []
    for v in S.basis:
        beta = alpha.contract(v)
        rows.extend(_contraction_matrix(beta))
    return Subspace(n, _elim.nullspace(rows, n))


def restrict(alpha, N):
    """``alpha`` restricted to N, in the coordinates of N's echelon basis."""
    if N.ambient_dim != alpha.dim:
        raise ValueError("dimension mismatch between form and subspace")
    m, k = N.dim, alpha.degree
    comps = {}
    for I in combinations(range(m), k):
        value = alpha(*[N.basis[i] for i in I])
        if value:
            comps[I] = value
    return LinForm(m, k, comps)


def _restrict_to_vectors(alpha, vectors):
    m, k = len(vectors), alpha.degree
    comps = {}
    for I in combinations(range(m), k):
        value = alpha(*[vectors[i] for i in I])
        if value:
            comps[I] = value
    return LinForm(m, k, comps)


@dataclass(frozen=True)
class LinearReduction:
    """Result of :func:`linear_reduce`.

    Subspaces are in ambient coordinates.  ``quotient_basis`` lists ambient
    vectors spanning an echelon complement of ``ker alpha_N`` in N; the
    ``reduced_form`` is written in that basis.  ``alpha1`` is the form
    induced on ``N / (N & S)``, written on an echelon complement of ``N & S``.
    """

    N: Subspace
    alpha_N: LinForm
    kernel_of_alpha_N: Subspace
    N_cap_S: Subspace
    quotient_basis: tuple
    quotient_dim: int
    reduced_form: LinForm
    alpha1: LinForm
    alpha1_basis: tuple
    is_symplectic: bool


def _complement_in(N, sub_in_N_coords):
    """Ambient vectors of N completing a subspace given in N-coordinates."""
    return [N.embed(e) for e in sub_in_N_coords.complement_coordinates()]


def linear_reduce(alpha, S):
    """Linear reduction of ``alpha`` by the subspace S (any degree k >= 2)."""
    if alpha.degree < 2:
        raise ValueError("linear_reduce needs k >= 2")
    N = perp(alpha, S)
    alpha_N = restrict(alpha, N)
    K_local = kernel(alpha_N) if N.dim else Subspace(0)
    K = Subspace(alpha.dim, [N.embed(v) for v in K_local.basis])
    NS = N & S
    q_basis = _complement_in(N, K_local) if N.dim else []
    reduced = _restrict_to_vectors(alpha, q_basis)
    NS_local = Subspace(N.dim, [N.coordinates(v) for v in NS.basis])
    a1_basis = _complement_in(N, NS_local) if N.dim else []
    alpha1 = _restrict_to_vectors(alpha, a1_basis)
    if alpha.degree == 2:
        expected = kernel(alpha) + NS
        if expected != K:
            raise AssertionError("ker alpha_N differs from ker alpha + (N & S)")
    nondeg = kernel(reduced).dim == 0 if reduced.dim else True
    return LinearReduction(
        N=N,
        alpha_N=alpha_N,
        kernel_of_alpha_N=K,
        N_cap_S=NS,
        quotient_basis=tuple(tuple(v) for v in q_basis),
        quotient_dim=N.dim - K.dim,
        reduced_form=reduced,
        alpha1=alpha1,
        alpha1_basis=tuple(tuple(v) for v in a1_basis),
        is_symplectic=nondeg,
    )


def pointwise(form, point):
    """Evaluate a differential form at a rational point into a :class:`LinForm`."""
    return LinForm(form.chart.dim, form.degree, form.evaluate(point))
