from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycong.poly import (Polynomial, PolynomialSyntaxError, index_count, iter_multiindices, parse,
                           random_polynomial, terms_on_grid, weight_sum)


def brute_value(F: Polynomial, x) -> int:
    return sum(c * math.prod(v ** e for v, e in zip(x, exps)) for exps, c in F.terms) % F.modulus


class TestMultiIndices:
    def test_graded_order(self):
        assert iter_multiindices(2, 2) == [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]

    def test_include_zero(self):
        assert iter_multiindices(1, 3, include_zero=True)[0] == (0, 0, 0)

    @pytest.mark.parametrize("k,d,r,K", [(2, 1, 2, 3), (2, 2, 5, 8), (3, 2, 9, 20), (2, 3, 9, 15), (3, 1, 3, 6)])
    def test_counts(self, k, d, r, K):
        assert index_count(k, d) == r == len(iter_multiindices(k, d))
        assert weight_sum(k, d) == K == sum(map(sum, iter_multiindices(k, d)))

    @given(st.integers(1, 5), st.integers(1, 4))
    def test_closed_forms(self, k, d):
        assert index_count(k, d) == math.comb(k + d, d) - 1
        assert weight_sum(k, d) * (d + 1) == d * (index_count(k, d) + 1) * k


class TestParse:
    def test_implicit_product(self):
        F = parse("3x1x2 + x2^2", 5)
        assert F.dims == 2 and F.coeffs == {(1, 1): 3, (0, 2): 1}

    def test_reduction_and_sign(self):
        F = parse("7*x1^3 - 2", 5)
        assert F.coeffs == {(3,): 2, (0,): 3}
        assert parse("-x1^2+4", 5).coeffs == {(2,): 4, (0,): 4}

    def test_repeated_variable_merges(self):
        assert parse("x1*x2*x1", 7).coeffs == {(2, 1): 1}

    def test_declared_dims(self):
        assert parse("x1", 5, dims=3).dims == 3

    @pytest.mark.parametrize("bad", ["x1+", "x0", "", "x1^", "+*x1", "x1 $ x2", "2**x1"])
    def test_syntax_errors(self, bad):
        with pytest.raises(PolynomialSyntaxError):
            parse(bad, 5)

    def test_dimension_overflow(self):
        with pytest.raises(PolynomialSyntaxError):
            parse("x3", 5, dims=2)

    def test_round_trip_through_str(self):
        F = parse("4*x1^2*x2 + 3*x2 + x1 + 6", 11)
        assert parse(str(F), 11, dims=2) == F


class TestPolynomial:
    def test_small_modulus_rejected(self):
        with pytest.raises(ValueError):
            Polynomial(2, 1, {(1,): 1})

    def test_zero(self):
        Z = parse("0", 5, 2)
        assert Z.is_zero() and Z.degree == 0

    def test_leading_gcd(self):
        assert parse("2*x1^2 + 3*x1*x2", 6).leading_gcd() == 2
        assert parse("2*x1^2 + 5*x2^2", 6).leading_gcd() == 1

    def test_graph_form(self):
        F = parse("x1^2 + x2^2 - x3", 7)
        assert F.is_graph_form()
        assert F.restrict_graph() == parse("x1^2 + x2^2", 7)
        assert not parse("x1^2 + x2*x3 - x3", 7).is_graph_form()

    def test_arithmetic(self):
        F, G = parse("x1 + 1", 7), parse("x1 - 1", 7)
        assert F * G == parse("x1^2 - 1", 7)
        assert F - G == parse("2", 7, 1)

    @given(st.integers(3, 40), st.data())
    @settings(max_examples=40, deadline=None)
    def test_translate_matches_evaluation(self, m, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        F = random_polynomial(data.draw(st.integers(1, 3)), 2, m, rng, unit_leading=False)
        K = data.draw(st.tuples(st.integers(-50, 50), st.integers(-50, 50)))
        G = F.translate(K)
        assert G.top_terms() == F.top_terms()
        for x in itertools.product(range(3), repeat=2):
            assert G.evaluate(x) == F.evaluate([a + b for a, b in zip(x, K)])

    @given(st.integers(3, 200), st.data())
    @settings(max_examples=40, deadline=None)
    def test_grid_values_match_brute_force(self, m, data):
        rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
        F = random_polynomial(data.draw(st.integers(1, 4)), 2, m, rng, unit_leading=False)
        axes = [np.arange(-3, 5), np.arange(10, 14)]
        vals = F.grid_values(axes)
        for (i, a), (j, b) in itertools.product(enumerate(axes[0]), enumerate(axes[1])):
            assert vals[i, j] == brute_value(F, (int(a), int(b))) == F.evaluate((int(a), int(b)))

    def test_large_modulus_grid_is_exact(self):
        m = (1 << 31) - 1
        F = parse("x1^5 + 123456789*x1^2*x2 + x2^3", m)
        axes = [np.array([m - 1, 987654321]), np.array([m - 2, 5])]
        vals = terms_on_grid(F.terms, axes, m)
        for i, j in itertools.product(range(2), repeat=2):
            assert vals[i, j] == F.evaluate((int(axes[0][i]), int(axes[1][j])))

    @given(st.integers(3, 60), st.integers(2, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_random_polynomial_shape(self, m, k, d, seed):
        F = random_polynomial(k, d, m, np.random.default_rng(seed))
        assert F.degree == k and F.leading_gcd() == 1
