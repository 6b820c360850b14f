from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polycong.counting import (BudgetError, LambdaVector, T_table, count_J, count_J_convolution, count_MF,
                               count_NF, count_T, lambda_vector, signature_table, solvable_variable, uset_bound,
                               uset_cardinality, uset_enumerate, uset_table)
from polycong.poly import Polynomial, index_count, parse, random_polynomial
from polycong.regions import Ball, Box, Polytope

seeds = st.integers(0, 2**32 - 1)


class TestNF:
    def test_sum_of_squares_mod5(self):
        assert count_NF(parse("x1^2+x2^2", 5), Box.full(2)).count == 9

    def test_trivial_polynomials(self):
        assert count_NF(parse("1", 7, 2), Ball([0.5, 0.5], 0.4)).count == 0
        assert count_NF(parse("0", 7, 3), Box.full(3)).count == 343

    # values frozen from a Fraction-based brute force over all residues
    @pytest.mark.parametrize("m,expected", [(31, 104), (50, 304)])
    def test_graph_form_in_ball(self, m, expected):
        F = parse("x1^2+x2^2-x3", m)
        ball = Ball([0.5, 0.5, 0.5], 0.3)
        assert count_NF(F, ball).count == expected
        assert count_NF(F, ball, solve=False).count == expected

    def test_cubic_in_ball(self):
        F = parse("x1^3+2*x1*x2+x2^2+1", 23)
        assert count_NF(F, Ball(["0.4", "0.5"], "0.35")).count == 11

    def test_closed_box_boundary(self):
        assert count_NF(parse("x1^2+x2^2-1", 13), Box([0, 0], ["0.5", "0.5"])).count == 4

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            count_NF(parse("x1", 5), Box.full(2))

    def test_budget(self):
        with pytest.raises(BudgetError):
            count_NF(parse("x1*x2", 101), Box.full(2), budget=100)

    def test_solvable_variable(self):
        assert solvable_variable(parse("x1^2+x2^2-x3", 7)) == 2
        assert solvable_variable(parse("x1^2+3*x2", 9)) is None
        assert solvable_variable(parse("x1^2+x1*x2+x2", 7)) is None

    @given(st.integers(5, 40), st.permutations([0, 1, 2]), seeds)
    @settings(max_examples=20, deadline=None)
    def test_variable_permutation_invariance(self, m, perm, seed):
        rng = np.random.default_rng(seed)
        F = random_polynomial(2, 3, m, rng, unit_leading=False)
        lo = rng.uniform(0, 0.4, 3)
        hi = lo + rng.uniform(0.3, 0.6, 3)
        G = Polynomial(m, 3, tuple((tuple(e[perm.index(t)] for t in range(3)), c) for e, c in F.terms))
        box = Box([f"{v:.3f}" for v in lo], [f"{min(v, 1):.3f}" for v in hi])
        pbox = Box([f"{lo[perm.index(t)]:.3f}" for t in range(3)], [f"{min(hi[perm.index(t)], 1):.3f}" for t in range(3)])
        assert count_NF(F, box).count == count_NF(G, pbox).count

    @given(st.integers(5, 30), seeds)
    @settings(max_examples=20, deadline=None)
    def test_matches_brute_force(self, m, seed):
        rng = np.random.default_rng(seed)
        F = random_polynomial(2, 2, m, rng, unit_leading=False)
        P = Polytope([([1, 2], "1.4"), (["-1", "1"], "0.5")])
        brute = sum(1 for x in itertools.product(range(m), repeat=2)
                    if F.evaluate(x) == 0 and Fraction(x[0], m) + 2 * Fraction(x[1], m) <= Fraction(7, 5)
                    and Fraction(x[1] - x[0], m) <= Fraction(1, 2))
        assert count_NF(F, P).count == brute

    def test_thread_count_does_not_change_total(self):
        F = parse("x1^2+x2^3+x1*x2+1", 1009)
        ball = Ball([0.5, 0.5], 0.45)
        assert count_NF(F, ball, threads=1).count == count_NF(F, ball, threads=4).count


class TestMF:
    def test_example(self):
        assert count_MF(parse("x1^2", 7), [0], 0, 3, 1).count == 1

    def test_offset_box(self):
        F = parse("3*x1^2*x2 + x2^3 + 5*x1", 11)
        assert count_MF(F, [2, 5], 4, 4, 3).count == 4

    @given(st.integers(3, 30), st.integers(1, 8), seeds)
    @settings(max_examples=25, deadline=None)
    def test_full_interval_counts_every_point(self, m, H, seed):
        F = random_polynomial(2, 2, m, np.random.default_rng(seed), unit_leading=False)
        assert count_MF(F, [3, 1], 7, H, m).count == H**2

    @given(st.integers(3, 30), st.integers(1, 6), st.integers(1, 40), seeds)
    @settings(max_examples=25, deadline=None)
    def test_periodicity(self, m, H, R, seed):
        rng = np.random.default_rng(seed)
        F = random_polynomial(3, 2, m, rng, unit_leading=False)
        K, L = [int(v) for v in rng.integers(0, 50, 2)], int(rng.integers(0, 50))
        a = count_MF(F, K, L, H, R).count
        assert a == count_MF(F, [K[0] + m, K[1] + m], L + m, H, R).count
        brute = sum(1 for x in itertools.product(range(K[0] + 1, K[0] + H + 1), range(K[1] + 1, K[1] + H + 1))
                    for y in range(L + 1, L + R + 1) if (F.evaluate(x) - y) % m == 0)
        assert a == brute

    def test_real_sizes_floor(self):
        F = parse("x1^2", 7)
        assert count_MF(F, [0], 0, 3.9, 1.5) == count_MF(F, [0], 0, 3, 1)


class TestLambda:
    def test_examples(self):
        assert lambda_vector([(3,), (1,)], 2).values == (2, 8)
        assert lambda_vector([(5,), (2,)], 1).values == (3,)
        pts = [(1, 2), (3, 1), (1, 2), (3, 1)]
        assert lambda_vector(pts, 3).is_zero()

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            lambda_vector([(1,), (2,), (3,)], 2)

    @given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2), st.integers(1, 6), seeds)
    @settings(max_examples=40, deadline=None)
    def test_range(self, s, k, d, H, seed):
        rng = np.random.default_rng(seed)
        pts = rng.integers(1, H + 1, size=(2 * s, d))
        lam = lambda_vector(pts, k)
        assert lam.within_range(s, H)
        assert len(lam.values) == index_count(k, d)


def brute_J(s, k, d, H, U=None):
    idx = LambdaVector.zero(k, d).indices
    pts = list(itertools.product(range(1, H + 1), repeat=d))
    C = Counter(tuple(sum(math.prod(c**e for c, e in zip(p, i)) for p in t) for i in idx)
                for t in itertools.product(pts, repeat=s))
    U = tuple(U) if U is not None else (0,) * len(idx)
    return sum(n * C.get(tuple(a - b for a, b in zip(v, U)), 0) for v, n in C.items())


class TestJ:
    @pytest.mark.parametrize("s,k,d,H,expected", [
        (2, 2, 1, 6, 66), (2, 3, 1, 7, 91), (2, 2, 2, 3, 153), (3, 2, 1, 5, 563), (3, 3, 1, 5, 545),
        (2, 1, 2, 4, 1936),
    ])
    def test_frozen_values(self, s, k, d, H, expected):
        assert count_J(s, k, d, 0, H).count == expected
        assert count_J_convolution(s, k, d, 0, H).count == expected

    @pytest.mark.parametrize("s,k,d", [(1, 1, 1), (2, 2, 2), (3, 1, 1)])
    def test_H_equals_one(self, s, k, d):
        assert count_J(s, k, d, 0, 1).count == 1
        assert count_J(s, k, d, [1] * index_count(k, d), 1).count == 0

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_single_pair_is_diagonal(self, k):
        assert count_J(1, k, 1, 0, 9).count == 9

    @pytest.mark.parametrize("H", [1, 2, 7, 20])
    def test_additive_energy_closed_form(self, H):
        assert count_J_convolution(2, 1, 1, 0, H).count == (2 * H**3 + H) // 3

    def test_wide_signature_box(self):
        # spans 1e4 * 1e8 * 1e12 need more than one int64 key word
        table = signature_table(1, 3, 1, 10**4)
        assert table.codec.dtype is not None
        assert count_J_convolution(1, 3, 1, 0, 10**4, table=table).count == 10**4
        U = table.sigs[5] - table.sigs[7]
        assert count_J_convolution(1, 3, 1, U, 10**4, table=table).count == 1
        assert count_J(1, 3, 1, U, 10**4).count == 1
        assert np.array_equal(table.codec.decode(table.codec.encode(table.sigs)), table.sigs)

    def test_budget(self):
        with pytest.raises(BudgetError):
            count_J(3, 2, 2, 0, 10)
        with pytest.raises(BudgetError):
            count_J_convolution(4, 2, 2, 0, 30, budget=1000)

    def test_wrong_target_length(self):
        with pytest.raises(ValueError):
            count_J(1, 2, 1, [1, 2, 3], 4)

    @given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 2), st.integers(1, 4), seeds)
    @settings(max_examples=40, deadline=None)
    def test_direct_equals_convolution_equals_brute(self, s, k, d, H, seed):
        rng = np.random.default_rng(seed)
        table = signature_table(s, k, d, H)
        if rng.random() < 0.3:
            U = np.zeros(index_count(k, d), dtype=np.int64)
        else:
            U = table.sigs[rng.integers(len(table.sigs))] - table.sigs[rng.integers(len(table.sigs))]
        a = count_J(s, k, d, U, H).count
        assert a == count_J_convolution(s, k, d, U, H, table=table).count
        if H ** (s * d) <= 300:
            assert a == brute_J(s, k, d, H, U)
        assert a <= table.J0()


class TestT:
    def test_frozen_values(self):
        G = parse("x1^2+3*x1*x2+x2", 11)
        assert [count_T(G, u, 3, 2).count for u in range(3)] == [615, 593, 603]

    def test_zero_polynomial(self):
        Z = parse("0", 7, 2)
        assert count_T(Z, 0, 3, 2).count == 3**8
        assert count_T(Z, 1, 3, 2).count == 0

    @given(st.integers(3, 25), st.integers(1, 4), st.integers(1, 2), st.integers(1, 2), seeds)
    @settings(max_examples=30, deadline=None)
    def test_partition_and_direct(self, m, H, s, d, seed):
        F = random_polynomial(2, d, m, np.random.default_rng(seed), unit_leading=False)
        table = T_table(F, H, s)
        assert sum(table) == H ** (2 * s * d)
        u = seed % m
        assert count_T(F, u, H, s, method="direct").count == table[u]

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            count_T(parse("x1^2", 5), 0, 2, 1, method="fft")


class TestUSet:
    def test_small_example(self):
        F = parse("x1^2", 5)
        # |u_1| <= 2, |u_2| <= 4, u_2 = u (mod 5)
        assert uset_table(F, 2, 1) == [5, 10, 10, 10, 10]
        res = uset_cardinality(F, 0, 2, 1)
        assert res.exact == 5 and res.bound == Fraction(102, 5) and res.holds

    def test_linear_rejected(self):
        with pytest.raises(ValueError):
            uset_cardinality(parse("x1+x2", 5), 0, 2, 1)

    def test_non_unit_leading_rejected(self):
        with pytest.raises(ValueError):
            uset_cardinality(parse("2*x1^2+x1", 6), 0, 2, 1)

    @given(st.integers(3, 15), st.integers(1, 3), st.integers(1, 2), st.integers(1, 2), seeds)
    @settings(max_examples=30, deadline=None)
    def test_table_matches_enumeration_and_bound(self, m, H, s, d, seed):
        F = random_polynomial(2, d, m, np.random.default_rng(seed))
        table = uset_table(F, H, s)
        u = seed % m
        if math.prod(2 * s * H ** w + 1 for w in [1] * d + [2] * (index_count(2, d) - d)) <= 10**5:
            assert len(uset_enumerate(F, u, H, s)) == table[u]
        assert all(n <= uset_bound(m, s, H, 2, d) for n in table)
