"""Exact multivariate polynomials over the rationals and a small expression parser.

A :class:`Poly` lives on an ordered tuple of variable names.  Terms are kept
in a dict from exponent tuples to :class:`fractions.Fraction` coefficients and
printed in graded-lexicographic order with respect to the declared variable
order.  Variables listed as *Laurent* variables (model parameters such as
masses) may carry negative exponents, so that ``x/m2`` stays exact.
"""

from fractions import Fraction
from numbers import Rational
import re

__all__ = [
    "Poly",
    "ParseError",
    "ChartMismatch",
    "parse",
    "parse_ast",
    "format_rational",
]


class ChartMismatch(ValueError):
    """Operands live on different variable lists."""


class ParseError(ValueError):
    """Syntax or semantic error in an expression, with a 0-based position."""

    def __init__(self, message, position=None, text=None):
        self.message = message
        self.position = position
        self.text = text
        if position is None:
            super().__init__(message)
        else:
            super().__init__(f"{message} at position {position}")


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def format_rational(c):
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _grlex_key(exps):
    return (sum(exps), exps)


class Poly:
    """Immutable polynomial (Laurent in selected variables) with rational coefficients."""

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(self, variables, terms=None):
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError(f"duplicate variable names in {variables}")
        n = len(variables)
        clean = {}
        if terms:
            items = terms.items() if hasattr(terms, "items") else terms
            for exps, coef in items:
                exps = tuple(int(e) for e in exps)
                if len(exps) != n:
                    raise ValueError("exponent vector length does not match variables")
                coef = _as_fraction(coef)
                if coef:
                    total = clean.get(exps, 0) + coef
                    if total:
                        clean[exps] = total
                    else:
                        clean.pop(exps, None)
        self.variables = variables
        self._terms = clean
        self._hash = None

    # construction helpers ------------------------------------------------

    @classmethod
    def _raw(cls, variables, terms):
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def zero(cls, variables):
        return cls._raw(tuple(variables), {})

    @classmethod
    def const(cls, variables, value):
        variables = tuple(variables)
        value = _as_fraction(value)
        return cls._raw(variables, {(0,) * len(variables): value} if value else {})

    @classmethod
    def var(cls, variables, name):
        variables = tuple(variables)
        try:
            i = variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None
        exps = [0] * len(variables)
        exps[i] = 1
        return cls._raw(variables, {tuple(exps): Fraction(1)})

    @classmethod
    def monomial(cls, variables, powers, coef=1):
        """``coef * prod(v**k for v, k in powers.items())``."""
        variables = tuple(variables)
        exps = [0] * len(variables)
        for name, k in powers.items():
            exps[variables.index(name)] += k
        return cls(variables, {tuple(exps): coef})

    # basic queries --------------------------------------------------------

    def terms(self):
        """(exponent tuple, coefficient) pairs in canonical graded-lex order."""
        return sorted(self._terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def term_dict(self):
        return dict(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_zero(self):
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def is_constant(self):
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_value(self):
        """Value of a constant polynomial; raises if not constant."""
        if not self._terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self._terms.values()))

    def constant_term(self):
        return self._terms.get((0,) * len(self.variables), Fraction(0))

    def used_variables(self):
        """Variables occurring with a nonzero exponent, in declared order."""
        used = [False] * len(self.variables)
        for exps in self._terms:
            for i, e in enumerate(exps):
                if e:
                    used[i] = True
        return tuple(v for v, u in zip(self.variables, used) if u)

    def depends_on(self, name):
        i = self._index(name)
        return any(exps[i] for exps in self._terms)

    def total_degree(self):
        """Largest total degree of a term; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def min_degree(self):
        if not self._terms:
            return -1
        return min(sum(e) for e in self._terms)

    def degree_in(self, name, restrict_to=None):
        i = self._index(name)
        if not self._terms:
            return -1
        return max(e[i] for e in self._terms)

    def degree_over(self, names):
        """Largest total degree counting only the given variables."""
        idx = [self._index(n) for n in names]
        if not self._terms:
            return -1
        return max(sum(e[i] for i in idx) for e in self._terms)

    def leading_coefficient(self):
        if not self._terms:
            return Fraction(0)
        return self.terms()[0][1]

    def _index(self, name):
        try:
            return self.variables.index(name)
        except ValueError:
            raise KeyError(f"unknown variable {name!r}") from None

    # equality and hashing ------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.variables == other.variables and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._terms.items())))
        return self._hash

    # arithmetic -------------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.variables != self.variables:
                raise ChartMismatch(
                    f"variable lists differ: {self.variables} vs {other.variables}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return Poly.const(self.variables, other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for exps, c in other._terms.items():
            s = terms.get(exps, 0) + c
            if s:
                terms[exps] = s
            else:
                terms.pop(exps, None)
        return Poly._raw(self.variables, terms)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.variables, {e: -c for e, c in self._terms.items()})

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not self._terms or not other._terms:
            return Poly._raw(self.variables, {})
        terms = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(e, 0) + c1 * c2
                if s:
                    terms[e] = s
                else:
                    terms.pop(e, None)
        return Poly._raw(self.variables, terms)

    __rmul__ = __mul__

    def scale(self, c):
        c = _as_fraction(c)
        if not c:
            return Poly._raw(self.variables, {})
        return Poly._raw(self.variables, {e: v * c for e, v in self._terms.items()})

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(1 / _as_fraction(other))
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("exponent must be an int")
        if k < 0:
            return self.inverse() ** (-k)
        result = Poly.const(self.variables, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # units (single terms) --------------------------------------------------

    def is_unit(self, unit_vars=()):
        """True for a single term whose variables all lie in ``unit_vars``."""
        if len(self._terms) != 1:
            return False
        exps = next(iter(self._terms))
        allowed = {self._index(v) for v in unit_vars}
        return all(e == 0 or i in allowed for i, e in enumerate(exps))

    def inverse(self):
        """Inverse of a single-term polynomial (negative exponents allowed)."""
        if len(self._terms) != 1:
            raise ZeroDivisionError(f"cannot invert {self}: not a single term")
        (exps, c), = self._terms.items()
        return Poly._raw(self.variables, {tuple(-e for e in exps): 1 / c})

    def primitive(self):
        """Scale to coprime integer coefficients with a positive leading coefficient."""
        if not self._terms:
            return self
        from math import gcd

        den = 1
        for c in self._terms.values():
            den = den * c.denominator // gcd(den, c.denominator)
        g = 0
        for c in self._terms.values():
            g = gcd(g, abs(c.numerator * (den // c.denominator)))
        factor = Fraction(den, g)
        if self.leading_coefficient() < 0:
            factor = -factor
        return self.scale(factor)

    # calculus ---------------------------------------------------------------

    def diff(self, name):
        """Formal partial derivative with respect to ``name``."""
        i = self._index(name)
        terms = {}
        for exps, c in self._terms.items():
            k = exps[i]
            if k:
                e = exps[:i] + (k - 1,) + exps[i + 1:]
                terms[e] = c * k
        return Poly._raw(self.variables, terms)

    partial_derivative = diff

    # evaluation and substitution ------------------------------------------

    def evaluate(self, point):
        """Exact value at ``point`` (mapping name -> rational).

        Every variable that occurs in the polynomial must be bound.
        """
        missing = [v for v in self.used_variables() if v not in point]
        if missing:
            raise KeyError(f"missing binding for {', '.join(missing)}")
        values = [
            _as_fraction(point[v]) if v in point else None for v in self.variables
        ]
        total = Fraction(0)
        for exps, c in self._terms.items():
            term = c
            for v, e in zip(values, exps):
                if e:
                    if e < 0 and v == 0:
                        raise ZeroDivisionError("negative power of a zero value")
                    term *= v ** e
            total += term
        return total

    def subs(self, mapping):
        """Substitute Polys (or rationals) for variables; result on the same variables."""
        idx = {}
        for name, value in mapping.items():
            i = self._index(name)
            if not isinstance(value, Poly):
                value = Poly.const(self.variables, value)
            elif value.variables != self.variables:
                raise ChartMismatch("substituted value must share the variable list")
            idx[i] = value
        if not idx:
            return self
        cache = {}

        def power(i, k):
            key = (i, k)
            if key not in cache:
                cache[key] = idx[i] ** k
            return cache[key]

        result = Poly.zero(self.variables)
        grouped = {}
        for exps, c in self._terms.items():
            rest = tuple(0 if i in idx else e for i, e in enumerate(exps))
            sub = tuple((i, exps[i]) for i in sorted(idx) if exps[i])
            grouped.setdefault(sub, {})
            grouped[sub][rest] = c
        for sub, rest_terms in grouped.items():
            part = Poly._raw(self.variables, rest_terms)
            for i, k in sub:
                part = part * power(i, k)
            result = result + part
        return result

    def partial_evaluate(self, point):
        """Substitute rational values for some variables."""
        return self.subs({k: v for k, v in point.items() if k in self.variables})

    def on(self, variables):
        """Re-embed into another variable list containing every used variable."""
        variables = tuple(variables)
        if variables == self.variables:
            return self
        pos = {v: i for i, v in enumerate(variables)}
        m = len(variables)
        used = self.used_variables()
        for v in used:
            if v not in pos:
                raise ChartMismatch(f"variable {v!r} is not in the target list")
        mapping = [pos.get(v) for v in self.variables]
        terms = {}
        for exps, c in self._terms.items():
            e = [0] * m
            for j, k in zip(mapping, exps):
                if k:
                    e[j] = k
            terms[tuple(e)] = c
        return Poly._raw(variables, terms)

    def coefficient(self, name, k):
        """Coefficient of ``name**k`` as a polynomial free of ``name``."""
        i = self._index(name)
        terms = {}
        for exps, c in self._terms.items():
            if exps[i] == k:
                terms[exps[:i] + (0,) + exps[i + 1:]] = c
        return Poly._raw(self.variables, terms)

    def coefficients_in(self, names):
        """Split into {exponent tuple over ``names``: coefficient Poly}."""
        idx = [self._index(n) for n in names]
        out = {}
        for exps, c in self._terms.items():
            key = tuple(exps[i] for i in idx)
            rest = list(exps)
            for i in idx:
                rest[i] = 0
            out.setdefault(key, {})[tuple(rest)] = c
        return {k: Poly._raw(self.variables, v) for k, v in out.items()}

    # printing ---------------------------------------------------------------

    def _monomial_str(self, exps):
        parts = []
        for v, e in zip(self.variables, exps):
            if e == 1:
                parts.append(v)
            elif e:
                parts.append(f"{v}^{e}")
        return "*".join(parts)

    def __str__(self):
        if not self._terms:
            return "0"
        out = []
        for k, (exps, c) in enumerate(self.terms()):
            mono = self._monomial_str(exps)
            sign = "-" if c < 0 else "+"
            a = abs(c)
            if not mono:
                body = format_rational(a)
            elif a == 1:
                body = mono
            else:
                body = f"{format_rational(a)}*{mono}"
            if k == 0:
                out.append(body if sign == "+" else f"-{body}")
            else:
                out.append(f" {sign} {body}")
        return "".join(out)

    def __repr__(self):
        return f"Poly({str(self)!r}, {list(self.variables)!r})"


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>\*\*|[-+*/^(),]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastgroup)
        kind = m.lastgroup
        value = m.group(kind)
        if kind == "num" and "." in value:
            raise ParseError("decimal literals are not allowed; write a fraction", start, text)
        tokens.append((kind, value, start))
        pos = m.end()
    tokens.append(("end", "", n))
    return tokens


class _Parser:
    """Recursive-descent parser producing a tuple-based AST.

    Node shapes: ``("num", Fraction)``, ``("var", name)``, ``("diff", name)``,
    ``("add"|"sub"|"mul"|"div"|"wedge", a, b)``, ``("neg", a)``,
    ``("pow", a, int)``.  Every node carries its source position as last item.
    """

    def __init__(self, text, differentials=None):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        # name -> coordinate for tokens like "dx2"; None disables differentials
        self.differentials = differentials

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        return ParseError(message, tok[2], self.text)

    def expect(self, value):
        tok = self.take()
        if tok[1] != value:
            raise self.error(f"expected {value!r}", tok)
        return tok

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        node = self.expr()
        if self.peek()[0] != "end":
            raise self.error(f"unexpected {self.peek()[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            _, op, pos = self.take()
            rhs = self.term()
            node = ("add" if op == "+" else "sub", node, rhs, pos)
        return node

    def _starts_differential(self):
        kind, value, _ = self.peek()
        return (
            self.differentials is not None
            and kind == "name"
            and value in self.differentials
        )

    def term(self):
        node = self.unary()
        while True:
            kind, value, pos = self.peek()
            if value in ("*", "/"):
                self.take()
                rhs = self.unary()
                node = ("mul" if value == "*" else "div", node, rhs, pos)
            elif value == "^" and self.differentials is not None:
                # exponentiation was consumed by power(); a leftover caret is a wedge
                self.take()
                rhs = self.unary()
                node = ("wedge", node, rhs, pos)
            elif self._starts_differential() or (
                self.differentials is not None and value == "("
            ):
                rhs = self.unary()
                node = ("mul", node, rhs, pos)
            else:
                return node

    def unary(self):
        kind, value, pos = self.peek()
        if value == "-":
            self.take()
            return ("neg", self.unary(), pos)
        if value == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        kind, value, pos = self.peek()
        if value in ("^", "**"):
            nxt = self.tokens[self.i + 1]
            signed = nxt[1] == "-" and self.tokens[self.i + 2][0] == "num"
            if nxt[0] == "num" or signed:
                self.take()
                negative = False
                if signed:
                    self.take()
                    negative = True
                num_tok = self.take()
                k = int(num_tok[1])
                return ("pow", node, -k if negative else k, pos)
            if self.differentials is None or value == "**":
                bad = self.tokens[self.i + 1]
                if bad[1] == "-" or bad[0] == "name" or bad[1] == "(":
                    raise ParseError("exponent must be a non-negative integer literal", bad[2], self.text)
                raise ParseError("exponent must be an integer literal", bad[2], self.text)
        return node

    def atom(self):
        kind, value, pos = self.take()
        if kind == "num":
            return ("num", Fraction(int(value)), pos)
        if kind == "name":
            if self.differentials is not None and value in self.differentials:
                return ("diff", self.differentials[value], pos)
            return ("var", value, pos)
        if value == "(":
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise ParseError("unexpected end of expression", pos, self.text)
        raise ParseError(f"unexpected {value!r}", pos, self.text)


def parse_ast(text, differentials=None):
    """Parse ``text`` into a tuple AST (see :class:`_Parser`)."""
    return _Parser(text, differentials).parse()


def _eval_poly(node, variables, laurent, text):
    kind = node[0]
    if kind == "num":
        return Poly.const(variables, node[1])
    if kind == "var":
        if node[1] not in variables:
            raise ParseError(f"unknown variable {node[1]!r}", node[2], text)
        return Poly.var(variables, node[1])
    if kind == "diff":
        raise ParseError("differentials are not allowed in a scalar expression", node[2], text)
    if kind == "neg":
        return -_eval_poly(node[1], variables, laurent, text)
    if kind == "pow":
        base = _eval_poly(node[1], variables, laurent, text)
        k = node[2]
        if k < 0:
            if not base.is_unit(laurent):
                raise ParseError(
                    "negative exponent is only allowed on a parameter monomial", node[3], text
                )
            return base.inverse() ** (-k)
        return base ** k
    if kind == "wedge":
        raise ParseError("wedge product in a scalar expression", node[3], text)
    a = _eval_poly(node[1], variables, laurent, text)
    b = _eval_poly(node[2], variables, laurent, text)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    if kind == "mul":
        return a * b
    if kind == "div":
        if b.is_zero():
            raise ParseError("division by zero", node[3], text)
        if not b.is_unit(laurent):
            raise ParseError(
                "divisor must be a nonzero constant or a parameter monomial", node[3], text
            )
        return a * b.inverse()
    raise AssertionError(kind)


def parse(text, chart_vars, laurent=()):
    """Parse a polynomial expression over ``chart_vars``.

    ``laurent`` names variables (model parameters) that may be divided by or
    raised to negative powers.  Errors are reported as :class:`ParseError`
    with the offending position.
    """
    variables = tuple(chart_vars)
    node = parse_ast(text)
    return _eval_poly(node, variables, tuple(laurent), text)
