"""Independent reference computations used by the tests.

Deliberately naive: dense lists of Fractions, partial pivoting on the largest
magnitude entry, explicit permutation sums.  Nothing here imports the
package's elimination or linear-algebra code.
"""

from fractions import Fraction
from itertools import combinations, permutations


def rank(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        best = max(range(r, len(m)), key=lambda i: abs(m[i][c]), default=None)
        if best is None or m[best][c] == 0:
            continue
        m[r], m[best] = m[best], m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c] / m[r][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == len(m):
            break
    return r


def nullspace(rows, n):
    """Basis of {x in Q^n : rows x = 0} via column-wise back substitution."""
    m = [[Fraction(x) for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        best = max(range(r, len(m)), key=lambda i: abs(m[i][c]), default=None)
        if best is None or m[best][c] == 0:
            continue
        m[r], m[best] = m[best], m[r]
        piv = m[r][c]
        m[r] = [a / piv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fcol in free:
        x = [Fraction(0)] * n
        x[fcol] = Fraction(1)
        for row, pc in zip(m, pivots):
            x[pc] = -row[fcol]
        basis.append(x)
    return basis


def same_span(a, b):
    a, b = list(a), list(b)
    ra, rb = rank(a), rank(b)
    return ra == rb and rank(a + b) == ra


def intersection(a, b, n):
    a, b = [list(v) for v in a], [list(v) for v in b]
    if not a or not b:
        return []
    cols = [[a[i][r] for i in range(len(a))] + [-b[j][r] for j in range(len(b))] for r in range(n)]
    out = []
    for sol in nullspace(cols, len(a) + len(b)):
        out.append([sum(sol[i] * a[i][r] for i in range(len(a))) for r in range(n)])
    return out


def matvec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def bilinear(A, u, v):
    return sum(u[i] * A[i][j] * v[j] for i in range(len(u)) for j in range(len(v)))


def two_form_kernel(A):
    """ker of the antisymmetric matrix A (u with A u = 0; same as u^T A = 0)."""
    return nullspace(A, len(A))


def symplectic_orthogonal(A, vectors):
    """{u : A(v, u) = 0 for all v}."""
    n = len(A)
    rows = [[sum(v[i] * A[i][j] for i in range(n)) for j in range(n)] for v in vectors]
    return nullspace(rows, n) if rows else [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def form_value(components, vectors):
    """alpha(v_1..v_k) for alpha given by increasing index tuples, via permutation sums."""
    k = len(vectors)
    total = Fraction(0)
    for idx, c in components.items():
        for perm in permutations(range(k)):
            prod = Fraction(_perm_sign(perm))
            for slot, pos in enumerate(perm):
                prod *= vectors[slot][idx[pos]]
            total += c * prod
    return total


def contraction_rank(components, dim, degree):
    """Rank of v -> i(v) alpha, from brute-force values on basis vectors."""
    basis = [[Fraction(int(i == j)) for j in range(dim)] for i in range(dim)]
    rows = []
    for i in range(dim):
        row = []
        for J in combinations(range(dim), degree - 1):
            row.append(form_value(components, [basis[i]] + [basis[j] for j in J]))
        rows.append(row)
    return rank(rows)


# coordinate formulas for differential forms (Poly coefficients)


def coefficient(form, idx):
    """Component for an arbitrary index tuple via antisymmetry."""
    if len(set(idx)) < len(idx):
        return form.chart.zero()
    order = sorted(range(len(idx)), key=lambda k: idx[k])
    sign, seen = 1, list(order)
    for i in range(len(seen)):
        while seen[i] != i:
            j = seen[i]
            seen[i], seen[j] = seen[j], seen[i]
            sign = -sign
    c = form.components.get(tuple(sorted(idx)), form.chart.zero())
    return c if sign > 0 else -c


def d_oracle(form):
    """(d a)_{i0..ik} = sum_m (-1)^m d_{i_m} a_{i0..^i_m..ik}."""
    chart = form.chart
    out = {}
    for I in combinations(range(chart.dim), form.degree + 1):
        total = chart.zero()
        for m, i in enumerate(I):
            rest = I[:m] + I[m + 1:]
            term = coefficient(form, rest).diff(chart.coords[i])
            total = total + (term if m % 2 == 0 else -term)
        if total:
            out[I] = total
    return out


def lie_oracle(X, form):
    """(L_X a)_I = X(a_I) + sum_m a_{i1..j..ik} d_{i_m} X^j."""
    chart = form.chart
    coords = chart.coords
    out = {}
    for I in combinations(range(chart.dim), form.degree):
        total = X(coefficient(form, I))
        for m in range(len(I)):
            for j in range(chart.dim):
                J = I[:m] + (j,) + I[m + 1:]
                total = total + coefficient(form, J) * X[coords[j]].diff(coords[I[m]])
        if total:
            out[I] = total
    return out
