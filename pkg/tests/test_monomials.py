"""Graded lexicographic basis: order, indexing, prefix structure."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmoment.monomials import (CapacityError, basis, degree_count,
                               iter_exponents, monomial_count)


def test_counts_match_binomials():
    for n in range(1, 6):
        for d in range(0, 7):
            assert monomial_count(n, d) == math.comb(n + d, d)
    assert degree_count(2, 3) == 4          # x1^3, x1^2 x2, x1 x2^2, x2^3
    assert degree_count(3, 2) == 6


def test_order_n2_d2_exact():
    assert list(iter_exponents(2, 2)) == [
        (0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_order_within_degree_is_lex_descending():
    # degree-2 block for n = 3: x1-heavy exponents first
    block = [a for a in iter_exponents(3, 2) if sum(a) == 2]
    assert block == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]
    assert block == sorted(block, reverse=True)


@given(n=st.integers(1, 4), dlow=st.integers(0, 4), extra=st.integers(0, 3))
@settings(max_examples=60, deadline=None)
def test_prefix_property(n, dlow, extra):
    # the degree-d basis is literally the first C(n+d, d) entries of any
    # higher-degree basis; everything downstream (pinning, truncation,
    # flatness) leans on this
    small = basis(n, dlow)
    large = basis(n, dlow + extra)
    head = [large.exponent(i) for i in range(len(small))]
    assert head == [small.exponent(i) for i in range(len(small))]


@given(n=st.integers(1, 4), d=st.integers(0, 6))
@settings(max_examples=60, deadline=None)
def test_index_round_trip(n, d):
    b = basis(n, d)
    for i in range(len(b)):
        assert b.index_of(b.exponent(i)) == i


def test_membership_and_errors():
    b = basis(2, 3)
    assert (1, 2) in b
    assert (4, 0) not in b
    with pytest.raises(KeyError):
        b.index_of((4, 0))


@given(n=st.integers(1, 3), d=st.integers(0, 4),
       data=st.data())
@settings(max_examples=40, deadline=None)
def test_evaluate_matches_power_products(n, d, data):
    b = basis(n, d)
    pt = np.array([data.draw(st.floats(-2, 2, allow_nan=False)) for _ in range(n)])
    V = b.evaluate(pt.reshape(1, -1))
    assert V.shape == (1, len(b))
    for i in range(len(b)):
        expect = float(np.prod(pt ** np.array(b.exponent(i))))
        assert abs(V[0, i] - expect) <= 1e-9 * (1.0 + abs(expect))


def test_capacity_guard():
    with pytest.raises(CapacityError):
        basis(40, 40)
