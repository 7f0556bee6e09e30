"""Random generators and hypothesis strategies shared by the test modules."""

from fractions import Fraction
import random

from hypothesis import strategies as st
from oracles import rank as orank

from presym.cartan import Chart, DiffForm, VectorField
from presym.symexpr import Poly

small_fractions = st.fractions(min_value=-5, max_value=5, max_denominator=4)


def chart_of(n, name="R"):
    return Chart(name, tuple(f"x{i}" for i in range(n)))


@st.composite
def polys(draw, variables, max_degree=2, max_terms=4):
    n = len(variables)
    exps = st.tuples(*[st.integers(0, max_degree) for _ in range(n)])
    terms = draw(st.dictionaries(exps, small_fractions, max_size=max_terms))
    return Poly(variables, terms)


def rand_fraction(rng, size=4, nonzero=False):
    while True:
        v = Fraction(rng.randint(-size, size), rng.randint(1, 3))
        if v or not nonzero:
            return v


def rand_poly(rng, chart, degree=2, terms=3):
    n = len(chart.variables)
    out = {}
    for _ in range(rng.randint(0, terms)):
        e = [0] * n
        for _ in range(rng.randint(0, degree)):
            e[rng.randrange(n)] += 1
        out[tuple(e)] = rand_fraction(rng)
    return Poly(chart.variables, out)


def rand_form(rng, chart, degree, density=0.5, poly_degree=2):
    from itertools import combinations

    comps = {}
    for idx in combinations(range(chart.dim), degree):
        if rng.random() < density:
            comps[idx] = rand_poly(rng, chart, poly_degree)
    return DiffForm(chart, degree, comps)


def rand_field(rng, chart, poly_degree=2):
    return VectorField(chart, {x: rand_poly(rng, chart, poly_degree) for x in chart.coords})


def rand_constant_two_form(rng, n, rank=None):
    """Antisymmetric rational n x n matrix with the requested rank (even)."""
    if rank is None:
        rank = 2 * rng.randint(0, n // 2)
    # B^T J B with B random (rank x n) and J a random nondegenerate matrix
    while True:
        J = [[Fraction(0)] * rank for _ in range(rank)]
        for i in range(rank):
            for j in range(i + 1, rank):
                c = rand_fraction(rng)
                J[i][j], J[j][i] = c, -c
        B = [[rand_fraction(rng) for _ in range(n)] for _ in range(rank)]
        A = [[sum(B[a][i] * J[a][b] * B[b][j] for a in range(rank) for b in range(rank))
              for j in range(n)] for i in range(n)]
        if orank(A) == rank:
            return A


def random_seed_rng(seed):
    return random.Random(seed)
