from fractions import Fraction
from itertools import combinations
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from helpers import rand_constant_two_form, rand_fraction
from presym.linred import LinForm, Subspace, form_rank, kernel, linear_reduce, perp, restrict

seeds = st.integers(0, 2**31)


def random_subspace(rng, n, k):
    return [[rand_fraction(rng) for _ in range(n)] for _ in range(k)]


def test_symplectic_plane_has_trivial_kernel():
    alpha = LinForm.from_matrix([[0, 1], [-1, 0]])
    assert kernel(alpha).dim == 0
    assert form_rank(alpha) == 2


def test_from_matrix_rejects_non_antisymmetric():
    with pytest.raises(ValueError):
        LinForm.from_matrix([[0, 1], [1, 0]])


def test_contract_uses_first_slot():
    alpha = LinForm(3, 2, {(0, 1): 1})
    assert alpha.contract([1, 0, 0]) == LinForm(3, 1, {(1,): 1})
    assert alpha.contract([0, 1, 0]) == LinForm(3, 1, {(0,): -1})


def test_subspace_is_echelon_canonical():
    a = Subspace(3, [[2, 4, 0], [0, 1, 1]])
    b = Subspace(3, [[1, 3, 1], [1, 1, -1]])
    assert a == b
    assert a.basis == [(1, 0, -2), (0, 1, 1)]


def test_intersection_and_sum_dimensions():
    a = Subspace(4, [[1, 0, 0, 0], [0, 1, 0, 0]])
    b = Subspace(4, [[0, 1, 0, 0], [0, 0, 1, 0]])
    assert (a & b).dim == 1
    assert (a + b).dim == 3


def test_canonical_reduction_by_a_line():
    # dq1^dp1 + dq2^dp2 reduced by the span of e_q1: N = {dp1 = 0}, quotient is (q2, p2)
    alpha = LinForm(4, 2, {(0, 1): 1, (2, 3): 1})
    red = linear_reduce(alpha, Subspace(4, [[1, 0, 0, 0]]))
    assert red.N.dim == 3
    assert red.quotient_dim == 2
    assert red.is_symplectic
    assert red.kernel_of_alpha_N == Subspace(4, [[1, 0, 0, 0]])


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 7))
def test_kernel_matches_oracle(seed, n):
    rng = random.Random(seed)
    A = rand_constant_two_form(rng, n)
    K = kernel(LinForm.from_matrix(A))
    assert oracles.same_span(K.basis, oracles.two_form_kernel(A))
    assert K.dim == n - oracles.rank(A)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 7), st.integers(0, 3))
def test_perp_matches_oracle(seed, n, k):
    rng = random.Random(seed)
    A = rand_constant_two_form(rng, n)
    S = random_subspace(rng, n, k)
    N = perp(LinForm.from_matrix(A), Subspace(n, S))
    expected = oracles.symplectic_orthogonal(A, S)
    assert oracles.same_span(N.basis, expected)


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(3, 6))
def test_restriction_evaluates_on_basis(seed, n):
    rng = random.Random(seed)
    A = rand_constant_two_form(rng, n)
    N = Subspace(n, random_subspace(rng, n, rng.randint(1, n)))
    r = restrict(LinForm.from_matrix(A), N)
    for i, j in combinations(range(N.dim), 2):
        assert r[(i, j)] == oracles.bilinear(A, N.basis[i], N.basis[j])


@settings(max_examples=40, deadline=None)
@given(seeds, st.integers(3, 6), st.integers(1, 3))
def test_reduced_three_form_is_nondegenerate(seed, n, k):
    rng = random.Random(seed)
    comps = {I: rand_fraction(rng) for I in combinations(range(n), 3) if rng.random() < 0.6}
    alpha = LinForm(n, 3, comps)
    red = linear_reduce(alpha, Subspace(n, random_subspace(rng, n, k)))
    q = len(red.quotient_basis)
    if q:
        assert oracles.contraction_rank(red.reduced_form.components, q, 3) == q


def test_out_of_range_index_is_rejected():
    with pytest.raises(ValueError):
        LinForm(2, 2, {(0, 2): Fraction(1)})
