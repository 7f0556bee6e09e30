"""Exterior calculus on a single coordinate chart with polynomial coefficients.

A :class:`Chart` declares an ordered list of variables.  Some of them are
*parameters*: constants under ``d`` (masses, free coefficients of a
solution family) that still take part in polynomial arithmetic.  Forms are
indexed by strictly increasing tuples of positions in ``chart.coords``, the
non-parameter variables.
"""

from dataclasses import dataclass, field

from .symexpr import ChartMismatch, ParseError, Poly, parse_ast

__all__ = [
    "Chart",
    "DiffForm",
    "VectorField",
    "NotClosed",
    "exterior_derivative",
    "interior",
    "wedge",
    "lie_derivative",
    "lie_bracket",
    "integrate_closed_one_form",
    "parse_form",
]


class NotClosed(ValueError):
    """A form expected to be closed has a nonzero exterior derivative."""

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


@dataclass(frozen=True)
class Chart:
    """Coordinate chart: ordered variables, the parameter subset, and which
    parameters may be inverted (``laurent``)."""

    name: str
    variables: tuple
    parameters: tuple = ()
    laurent: tuple = ()
    coords: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "parameters", tuple(self.parameters))
        object.__setattr__(self, "laurent", tuple(self.laurent))
        if len(set(self.variables)) != len(self.variables):
            raise ValueError(f"duplicate variable names in chart {self.name!r}")
        missing = [p for p in self.parameters if p not in self.variables]
        if missing:
            raise ValueError(f"parameters {missing} are not chart variables")
        if any(p not in self.parameters for p in self.laurent):
            raise ValueError("laurent variables must be parameters")
        params = set(self.parameters)
        object.__setattr__(
            self, "coords", tuple(v for v in self.variables if v not in params)
        )

    @property
    def dim(self):
        return len(self.coords)

    def index(self, name):
        try:
            return self.coords.index(name)
        except ValueError:
            raise KeyError(f"{name!r} is not a coordinate of chart {self.name!r}") from None

    def poly(self, value):
        """Coerce a rational, a string expression or a Poly onto this chart."""
        from .symexpr import parse

        if isinstance(value, Poly):
            return value.on(self.variables)
        if isinstance(value, str):
            return parse(value, self.variables, self.laurent)
        return Poly.const(self.variables, value)

    def var(self, name):
        return Poly.var(self.variables, name)

    def zero(self):
        return Poly.zero(self.variables)

    def extend(self, names, *, parameters=False, name=None, laurent=False):
        """Chart with extra variables appended (optionally as parameters)."""
        names = tuple(names)
        params = self.parameters + (names if parameters else ())
        lau = self.laurent + (names if (parameters and laurent) else ())
        return Chart(name or self.name, self.variables + names, params, lau)

    def without(self, names, name=None):
        drop = set(names)
        return Chart(
            name or self.name,
            tuple(v for v in self.variables if v not in drop),
            tuple(p for p in self.parameters if p not in drop),
            tuple(p for p in self.laurent if p not in drop),
        )


def _check_same_chart(a, b):
    if a.chart != b.chart:
        raise ChartMismatch(f"charts differ: {a.chart.name!r} vs {b.chart.name!r}")


def _sort_with_sign(indices):
    """Sort a tuple of indices; return (sign, sorted) or (0, None) on repeats."""
    idx = list(indices)
    if len(set(idx)) != len(idx):
        return 0, None
    sign = 1
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class DiffForm:
    """A k-form ``sum_I c_I dx^I`` with Poly coefficients ``c_I``."""

    __slots__ = ("chart", "degree", "components")

    def __init__(self, chart, degree, components=None):
        if degree < 0 or degree > chart.dim:
            raise ValueError(f"degree {degree} out of range for a {chart.dim}-dim chart")
        comps = {}
        for idx, c in (components or {}).items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} does not have length {degree}")
            if any(a >= b for a, b in zip(idx, idx[1:])):
                raise ValueError(f"index {idx} is not strictly increasing")
            if any(i < 0 or i >= chart.dim for i in idx):
                raise ValueError(f"index {idx} out of range")
            c = chart.poly(c)
            if c:
                comps[idx] = comps.get(idx, chart.zero()) + c
                if not comps[idx]:
                    del comps[idx]
        self.chart = chart
        self.degree = degree
        self.components = comps

    @classmethod
    def _raw(cls, chart, degree, comps):
        obj = cls.__new__(cls)
        obj.chart = chart
        obj.degree = degree
        obj.components = comps
        return obj

    @classmethod
    def function(cls, chart, f):
        f = chart.poly(f)
        return cls._raw(chart, 0, {(): f} if f else {})

    @classmethod
    def differential(cls, chart, name):
        return cls._raw(chart, 1, {(chart.index(name),): chart.poly(1)})

    @classmethod
    def zero(cls, chart, degree):
        return cls._raw(chart, degree, {})

    @classmethod
    def from_terms(cls, chart, degree, terms):
        """Build from (index tuple in any order, coefficient) pairs."""
        comps = {}
        for idx, c in terms:
            sign, key = _sort_with_sign(idx)
            if not sign:
                continue
            c = chart.poly(c)
            if sign < 0:
                c = -c
            total = comps.get(key, chart.zero()) + c
            if total:
                comps[key] = total
            else:
                comps.pop(key, None)
        return cls._raw(chart, degree, comps)

    @classmethod
    def from_matrix(cls, chart, matrix):
        """2-form with ``Omega(e_i, e_j) = matrix[i][j]`` (upper triangle is read)."""
        n = chart.dim
        comps = {}
        for i in range(n):
            for j in range(i + 1, n):
                c = chart.poly(matrix[i][j])
                if c:
                    comps[(i, j)] = c
        return cls._raw(chart, 2, comps)

    # queries --------------------------------------------------------------

    def is_zero(self):
        return not self.components

    def __bool__(self):
        return bool(self.components)

    def __getitem__(self, idx):
        if isinstance(idx, tuple) and idx and isinstance(idx[0], str):
            idx = tuple(self.chart.index(n) for n in idx)
        sign, key = _sort_with_sign(idx)
        if not sign:
            return self.chart.zero()
        c = self.components.get(key)
        if c is None:
            return self.chart.zero()
        return c if sign > 0 else -c

    def scalar(self):
        """Coefficient of a 0-form."""
        if self.degree != 0:
            raise ValueError("not a 0-form")
        return self.components.get((), self.chart.zero())

    def is_constant_coefficient(self):
        """All coefficients free of the dynamical coordinates."""
        coords = self.chart.coords
        return all(
            not any(c.depends_on(x) for x in coords) for c in self.components.values()
        )

    def matrix(self):
        """Antisymmetric Poly matrix of a 2-form."""
        if self.degree != 2:
            raise ValueError("matrix() needs a 2-form")
        n = self.chart.dim
        z = self.chart.zero()
        m = [[z] * n for _ in range(n)]
        for (i, j), c in self.components.items():
            m[i][j] = c
            m[j][i] = -c
        return m

    def evaluate(self, point):
        """Components evaluated at a point: {index tuple: Fraction}."""
        return {idx: c.evaluate(point) for idx, c in self.components.items()}

    def __eq__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.degree == other.degree
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.chart, self.degree, frozenset(self.components.items())))

    # algebra ----------------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, DiffForm):
            return NotImplemented
        _check_same_chart(self, other)
        if self.degree != other.degree:
            raise ValueError("cannot add forms of different degree")
        comps = dict(self.components)
        for idx, c in other.components.items():
            total = comps.get(idx, self.chart.zero()) + c
            if total:
                comps[idx] = total
            else:
                comps.pop(idx, None)
        return DiffForm._raw(self.chart, self.degree, comps)

    def __neg__(self):
        return DiffForm._raw(
            self.chart, self.degree, {i: -c for i, c in self.components.items()}
        )

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        if isinstance(f, DiffForm):
            return wedge(self, f)
        f = self.chart.poly(f)
        comps = {}
        for idx, c in self.components.items():
            p = c * f
            if p:
                comps[idx] = p
        return DiffForm._raw(self.chart, self.degree, comps)

    __rmul__ = __mul__

    def __xor__(self, other):
        return wedge(self, other)

    def map_coefficients(self, fn):
        comps = {}
        for idx, c in self.components.items():
            p = fn(c)
            if p:
                comps[idx] = p
        return DiffForm._raw(self.chart, self.degree, comps)

    def subs(self, mapping):
        """Substitute into coefficients only (differentials untouched)."""
        return self.map_coefficients(lambda c: c.subs(mapping))

    def on(self, chart):
        """Re-express on a chart whose coordinates include every used coordinate."""
        if chart == self.chart:
            return self
        pos = [chart.index(x) if x in chart.coords else None for x in self.chart.coords]
        terms = []
        for idx, c in self.components.items():
            new = []
            for i in idx:
                if pos[i] is None:
                    raise ChartMismatch(
                        f"coordinate {self.chart.coords[i]!r} missing from chart {chart.name!r}"
                    )
                new.append(pos[i])
            terms.append((tuple(new), c.on(chart.variables)))
        return DiffForm.from_terms(chart, self.degree, terms)

    # printing ---------------------------------------------------------------

    def basis_str(self, idx):
        return "^".join("d" + self.chart.coords[i] for i in idx)

    def __str__(self):
        if not self.components:
            return "0"
        if self.degree == 0:
            return str(self.components[()])
        out = []
        for k, idx in enumerate(sorted(self.components)):
            c = self.components[idx]
            basis = self.basis_str(idx)
            if len(c) == 1:
                (exps, coef), = c.terms()
                neg = coef < 0
                body = str(-c if neg else c)
                body = basis if body == "1" else f"{body} {basis}"
            else:
                neg = False
                body = f"({c}) {basis}"
            if k == 0:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    def __repr__(self):
        return f"DiffForm<{self.degree}>({str(self)!r})"


class VectorField:
    """``sum_i X^i d/dx^i`` over the chart's coordinates."""

    __slots__ = ("chart", "components")

    def __init__(self, chart, components=None):
        comps = {}
        for name, c in (components or {}).items():
            if isinstance(name, int):
                name = chart.coords[name]
            if name not in chart.coords:
                raise KeyError(f"{name!r} is not a coordinate of chart {chart.name!r}")
            c = chart.poly(c)
            if c:
                comps[name] = c
        self.chart = chart
        self.components = comps

    @classmethod
    def _raw(cls, chart, comps):
        obj = cls.__new__(cls)
        obj.chart = chart
        obj.components = comps
        return obj

    @classmethod
    def coordinate(cls, chart, name):
        return cls(chart, {name: 1})

    def __getitem__(self, name):
        if isinstance(name, int):
            name = self.chart.coords[name]
        return self.components.get(name, self.chart.zero())

    def is_zero(self):
        return not self.components

    def __bool__(self):
        return bool(self.components)

    def __call__(self, f):
        """Directional derivative X(f)."""
        f = self.chart.poly(f)
        total = self.chart.zero()
        for name, c in self.components.items():
            df = f.diff(name)
            if df:
                total = total + c * df
        return total

    apply = __call__

    def evaluate(self, point):
        """Component vector at a point, ordered like ``chart.coords``."""
        return [self[x].evaluate(point) for x in self.chart.coords]

    def is_constant(self):
        coords = self.chart.coords
        return all(
            not any(c.depends_on(x) for x in coords) for c in self.components.values()
        )

    def __eq__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.chart == other.chart and self.components == other.components

    def __hash__(self):
        return hash((self.chart, frozenset(self.components.items())))

    def __add__(self, other):
        if not isinstance(other, VectorField):
            return NotImplemented
        _check_same_chart(self, other)
        comps = dict(self.components)
        for k, c in other.components.items():
            total = comps.get(k, self.chart.zero()) + c
            if total:
                comps[k] = total
            else:
                comps.pop(k, None)
        return VectorField._raw(self.chart, comps)

    def __neg__(self):
        return VectorField._raw(self.chart, {k: -c for k, c in self.components.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, f):
        f = self.chart.poly(f)
        comps = {}
        for k, c in self.components.items():
            p = c * f
            if p:
                comps[k] = p
        return VectorField._raw(self.chart, comps)

    __rmul__ = __mul__

    def map_coefficients(self, fn):
        comps = {}
        for k, c in self.components.items():
            p = fn(c)
            if p:
                comps[k] = p
        return VectorField._raw(self.chart, comps)

    def subs(self, mapping):
        return self.map_coefficients(lambda c: c.subs(mapping))

    def on(self, chart):
        comps = {}
        for k, c in self.components.items():
            if k not in chart.coords:
                raise ChartMismatch(f"coordinate {k!r} missing from chart {chart.name!r}")
            comps[k] = c.on(chart.variables)
        return VectorField._raw(chart, comps)

    def __str__(self):
        if not self.components:
            return "0"
        out = []
        for k, name in enumerate(n for n in self.chart.coords if n in self.components):
            c = self.components[name]
            basis = f"d/d{name}"
            if len(c) == 1:
                neg = c.leading_coefficient() < 0
                body = str(-c if neg else c)
                body = basis if body == "1" else f"{body}*{basis}"
            else:
                neg = False
                body = f"({c})*{basis}"
            if k == 0:
                out.append(f"-{body}" if neg else body)
            else:
                out.append(f" - {body}" if neg else f" + {body}")
        return "".join(out)

    def __repr__(self):
        return f"VectorField({str(self)!r})"


# ---------------------------------------------------------------------------
# operations


def _as_form(chart, value):
    if isinstance(value, DiffForm):
        return value
    return DiffForm.function(chart, value)


def exterior_derivative(form):
    """d of a k-form with k < n."""
    chart = form.chart
    if form.degree >= chart.dim:
        raise ValueError("exterior derivative of a top-degree form is not representable")
    comps = {}
    for idx, c in form.components.items():
        for j, x in enumerate(chart.coords):
            if j in idx:
                continue
            dc = c.diff(x)
            if not dc:
                continue
            sign = -1 if sum(1 for i in idx if i < j) % 2 else 1
            key = tuple(sorted(idx + (j,)))
            total = comps.get(key, chart.zero()) + (dc if sign > 0 else -dc)
            if total:
                comps[key] = total
            else:
                comps.pop(key, None)
    return DiffForm._raw(chart, form.degree + 1, comps)


d = exterior_derivative


def is_closed(form):
    if form.degree >= form.chart.dim:
        return True
    return exterior_derivative(form).is_zero()


def interior(X, form):
    """Contraction of ``X`` into the first slot of ``form``."""
    if form.degree == 0:
        raise ValueError("cannot contract a vector field into a 0-form")
    _check_same_chart(X, form)
    chart = form.chart
    coords = chart.coords
    comps = {}
    for idx, c in form.components.items():
        for p, i in enumerate(idx):
            xi = X.components.get(coords[i])
            if xi is None:
                continue
            key = idx[:p] + idx[p + 1:]
            term = xi * c
            if p % 2:
                term = -term
            total = comps.get(key, chart.zero()) + term
            if total:
                comps[key] = total
            else:
                comps.pop(key, None)
    return DiffForm._raw(chart, form.degree - 1, comps)


def wedge(a, b):
    """Exterior product ``a ^ b``."""
    _check_same_chart(a, b)
    chart = a.chart
    if a.degree + b.degree > chart.dim:
        raise ValueError(
            f"wedge of degrees {a.degree} and {b.degree} exceeds chart dimension {chart.dim}"
        )
    comps = {}
    for I, ca in a.components.items():
        for J, cb in b.components.items():
            if set(I) & set(J):
                continue
            inversions = sum(1 for j in J for i in I if i > j)
            key = tuple(sorted(I + J))
            term = ca * cb
            if inversions % 2:
                term = -term
            total = comps.get(key, chart.zero()) + term
            if total:
                comps[key] = total
            else:
                comps.pop(key, None)
    return DiffForm._raw(chart, a.degree + b.degree, comps)


def lie_derivative(X, form):
    """Lie derivative by Cartan's formula; on a Poly or 0-form it is X(f)."""
    if not isinstance(form, DiffForm):
        return X(form)
    _check_same_chart(X, form)
    if form.degree == 0:
        return DiffForm.function(form.chart, X(form.scalar()))
    out = interior(X, form)
    out = exterior_derivative(out)
    if form.degree < form.chart.dim:
        out = out + interior(X, exterior_derivative(form))
    return out


def lie_bracket(X, Y):
    """``[X, Y]`` with ``[X, Y](f) = X(Y(f)) - Y(X(f))``."""
    _check_same_chart(X, Y)
    chart = X.chart
    comps = {}
    for name in chart.coords:
        c = X(Y[name]) - Y(X[name])
        if c:
            comps[name] = c
    return VectorField._raw(chart, comps)


def integrate_closed_one_form(alpha):
    """Potential ``f`` with ``df = alpha`` and ``f(0) = 0`` (radial homotopy).

    A term of ``x_i * alpha_i`` with total degree m in the coordinates picks up
    the factor 1/m.  Raises :class:`NotClosed` naming a nonzero component of
    ``d alpha`` when ``alpha`` is not closed.
    """
    if alpha.degree != 1:
        raise ValueError("integrate_closed_one_form needs a 1-form")
    chart = alpha.chart
    if chart.dim > 1:
        dalpha = exterior_derivative(alpha)
        if dalpha:
            idx = sorted(dalpha.components)[0]
            raise NotClosed(
                f"form is not closed: d(alpha) has component "
                f"{dalpha.components[idx]} {dalpha.basis_str(idx)}",
                component=idx,
            )
    coord_pos = [chart.variables.index(x) for x in chart.coords]
    terms = {}
    for (i,), c in alpha.components.items():
        xi = chart.var(chart.coords[i])
        for exps, coef in (xi * c).term_dict().items():
            m = sum(exps[p] for p in coord_pos)
            terms[exps] = terms.get(exps, 0) + coef / m
    return Poly(chart.variables, terms)


# ---------------------------------------------------------------------------
# parsing forms


def _eval_form(node, chart, text):
    kind = node[0]
    if kind == "num":
        return DiffForm.function(chart, node[1])
    if kind == "var":
        if node[1] not in chart.variables:
            raise ParseError(f"unknown variable {node[1]!r}", node[2], text)
        return DiffForm.function(chart, chart.var(node[1]))
    if kind == "diff":
        return DiffForm.differential(chart, node[1])
    if kind == "neg":
        return -_eval_form(node[1], chart, text)
    if kind == "pow":
        base = _eval_form(node[1], chart, text)
        if base.degree != 0:
            raise ParseError("cannot raise a differential to a power", node[3], text)
        f = base.scalar()
        k = node[2]
        if k < 0:
            if not f.is_unit(chart.laurent):
                raise ParseError(
                    "negative exponent is only allowed on a parameter monomial", node[3], text
                )
            return DiffForm.function(chart, f.inverse() ** (-k))
        return DiffForm.function(chart, f ** k)
    a = _eval_form(node[1], chart, text)
    b = _eval_form(node[2], chart, text)
    pos = node[3]
    if kind in ("add", "sub"):
        if a.degree != b.degree:
            raise ParseError("terms of different degree in a sum", pos, text)
        return a + b if kind == "add" else a - b
    if kind in ("mul", "wedge"):
        if a.degree + b.degree > chart.dim:
            raise ParseError("wedge degree exceeds chart dimension", pos, text)
        if kind == "mul" and a.degree and b.degree:
            raise ParseError("use ^ for the wedge of two differentials", pos, text)
        return wedge(a, b)
    if kind == "div":
        if b.degree != 0:
            raise ParseError("cannot divide by a form", pos, text)
        f = b.scalar()
        if f.is_zero():
            raise ParseError("division by zero", pos, text)
        if not f.is_unit(chart.laurent):
            raise ParseError(
                "divisor must be a nonzero constant or a parameter monomial", pos, text
            )
        return a * f.inverse()
    raise AssertionError(kind)


def parse_form(text, chart):
    """Parse a form such as ``"2*m2 dx2^du2 + (x - y) dx^dy"`` on ``chart``.

    ``d<coord>`` denotes a coordinate differential; ``^`` between forms is the
    wedge product, ``^`` followed by an integer is a power.
    """
    diffs = {
        "d" + x: x for x in chart.coords if ("d" + x) not in chart.variables
    }
    node = parse_ast(text, differentials=diffs)
    return _eval_form(node, chart, text)
