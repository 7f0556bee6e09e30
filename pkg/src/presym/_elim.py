"""Gauss-Jordan elimination shared by the rational and polynomial layers.

Entries are either :class:`fractions.Fraction` or :class:`~presym.symexpr.Poly`.
Polynomial matrices are only eliminated with *unit* pivots (a nonzero
constant times a monomial in invertible parameters), which keeps every
intermediate result polynomial.  Pivots are the first admissible entry in
declared row order, so results are deterministic.
"""

from fractions import Fraction

from .symexpr import Poly


class NonUnitPivot(ValueError):
    """A column has nonzero entries but no invertible one."""

    def __init__(self, column, entry):
        super().__init__(
            f"column {column} has no invertible pivot (first nonzero entry {entry}); "
            "specialize the parameters or evaluate pointwise"
        )
        self.column = column
        self.entry = entry


class FractionOps:
    @staticmethod
    def is_zero(x):
        return x == 0

    @staticmethod
    def is_unit(x):
        return x != 0

    @staticmethod
    def inverse(x):
        return 1 / x

    zero = Fraction(0)
    one = Fraction(1)


class PolyOps:
    def __init__(self, variables, unit_vars=()):
        self.variables = tuple(variables)
        self.unit_vars = tuple(unit_vars)
        self.zero = Poly.zero(self.variables)
        self.one = Poly.const(self.variables, 1)

    @staticmethod
    def is_zero(x):
        return x.is_zero()

    def is_unit(self, x):
        return x.is_unit(self.unit_vars)

    @staticmethod
    def inverse(x):
        return x.inverse()


def rref(matrix, ops=FractionOps, pivot_cols=None):
    """Reduced row echelon form.

    ``pivot_cols`` limits the columns that may hold pivots (the remaining
    columns are carried along, e.g. an augmented right-hand side).
    Returns ``(rows, pivots)`` where ``pivots`` lists the pivot column of
    each nonzero row in order.
    """
    rows = [list(r) for r in matrix]
    if not rows:
        return [], []
    ncols = len(rows[0])
    limit = ncols if pivot_cols is None else pivot_cols
    pivots = []
    r = 0
    for col in range(limit):
        if r >= len(rows):
            break
        found = None
        first_nonzero = None
        for i in range(r, len(rows)):
            e = rows[i][col]
            if ops.is_zero(e):
                continue
            if first_nonzero is None:
                first_nonzero = e
            if ops.is_unit(e):
                found = i
                break
        if found is None:
            if first_nonzero is not None:
                raise NonUnitPivot(col, first_nonzero)
            continue
        rows[r], rows[found] = rows[found], rows[r]
        inv = ops.inverse(rows[r][col])
        rows[r] = [e * inv for e in rows[r]]
        pivot_row = rows[r]
        for i in range(len(rows)):
            if i == r:
                continue
            factor = rows[i][col]
            if ops.is_zero(factor):
                continue
            rows[i] = [a - factor * b for a, b in zip(rows[i], pivot_row)]
        pivots.append(col)
        r += 1
    return rows, pivots


def nullspace(matrix, ncols, ops=FractionOps):
    """Basis of ``{v : matrix v = 0}``, one vector per free column."""
    if not matrix:
        basis = []
        for f in range(ncols):
            v = [ops.zero] * ncols
            v[f] = ops.one
            basis.append(v)
        return basis
    rows, pivots = rref(matrix, ops)
    pivot_set = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        v = [ops.zero] * ncols
        v[f] = ops.one
        for i, p in enumerate(pivots):
            e = rows[i][f]
            if not ops.is_zero(e):
                v[p] = -e
        basis.append(v)
    return basis


def solve(matrix, rhs, ops=FractionOps):
    """Particular solution of ``matrix x = rhs`` with free variables set to zero.

    ``rhs`` is a list of right-hand sides (one column each).  Returns
    ``(solutions, residuals)``: ``solutions[c]`` is the solution vector for
    column ``c`` and ``residuals[c]`` lists the right-hand-side entries of
    the rows that reduced to zero on the left (nonzero ones mean the system
    is inconsistent unless those entries vanish).
    """
    ncols = len(matrix[0]) if matrix else 0
    m = len(matrix)
    aug = [list(matrix[i]) + [rhs_col[i] for rhs_col in rhs] for i in range(m)]
    rows, pivots = rref(aug, ops, pivot_cols=ncols)
    solutions = []
    residuals = []
    for c in range(len(rhs)):
        x = [ops.zero] * ncols
        for i, p in enumerate(pivots):
            x[p] = rows[i][ncols + c]
        solutions.append(x)
        residuals.append([rows[i][ncols + c] for i in range(len(pivots), m)])
    return solutions, residuals


def rank(matrix, ops=FractionOps):
    if not matrix:
        return 0
    return len(rref(matrix, ops)[1])


def sparse_solve(rows, rhs):
    """Solve a sparse rational system exactly.

    ``rows`` is a list of dicts {column: Fraction}; ``rhs`` a list of
    Fractions.  Returns a dict {column: value} for one solution (free
    columns zero) or ``None`` if the system is inconsistent.
    """
    pivot_rows = {}  # pivot column -> (row dict, rhs value), kept reduced by earlier pivots
    for row, b in zip(rows, rhs):
        row = dict(row)
        b = Fraction(b)
        # eliminate existing pivots from the incoming row
        changed = True
        while changed:
            changed = False
            for col in [c for c in row if c in pivot_rows]:
                f = row.get(col)
                if not f:
                    continue
                prow, pb = pivot_rows[col]
                for c, v in prow.items():
                    nv = row.get(c, 0) - f * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
                b -= f * pb
                changed = True
        if not row:
            if b:
                return None
            continue
        col = min(row)
        inv = 1 / row[col]
        row = {c: v * inv for c, v in row.items()}
        b *= inv
        # keep earlier pivot rows free of the new pivot column
        for pc, (prow, pb) in pivot_rows.items():
            f = prow.get(col)
            if f:
                for c, v in row.items():
                    nv = prow.get(c, 0) - f * v
                    if nv:
                        prow[c] = nv
                    else:
                        prow.pop(c, None)
                pivot_rows[pc] = (prow, pb - f * b)
        pivot_rows[col] = (row, b)
    # rows are fully reduced against each other: set free columns to zero
    return {col: b for col, (row, b) in pivot_rows.items() if b}
