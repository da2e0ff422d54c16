import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_bpm.combinatorics import kappa_closed
from carleman_bpm.conjugation import ConjPolynomial, split
from carleman_bpm.ibp import (
    BPGrid,
    QuadForm,
    bpg_weight,
    carleman_leading_table,
    cross_coeff_bpg,
    cross_coeff_closed,
    cross_coeff_shortcut,
    cross_support,
    diag_coeff_bpg,
    diag_ledger,
    graph5,
    graph5_node,
    graph6,
    i1i2_product,
    i1i2_reduced,
    lower_order_table,
    multiply,
    reduce_space,
    reduce_time,
    time_quadform,
)
from oracles import path_weight_sum, random_grid, random_grids


def test_bpg_basic_rules():
    g = BPGrid(1, 1, {(1, 0): 1, (1, 1): 1}, {(0, 1): 1, (1, 1): 1})
    assert bpg_weight(g, (0, 0)) == 1
    assert bpg_weight(g, (1, 1)) == 2
    dead = BPGrid(2, 2, {}, {})
    assert all(bpg_weight(dead, nd) == 0 for nd in dead.nodes() if nd != (0, 0))
    with pytest.raises(ValueError):
        bpg_weight(g, (2, 0))


def test_bpg_matches_enumeration_on_random_grids():
    cases = random_grids(250)
    assert len(cases) >= 200
    for g, start in cases:
        assert bpg_weight(g, start) == path_weight_sum(g, start)


@given(st.randoms(use_true_random=False))
def test_bpg_matches_enumeration_property(rng):
    g, start = random_grid(rng)
    assert bpg_weight(g, start) == path_weight_sum(g, start)


def test_graph5_example_weights():
    g = graph5(4, 2)
    nodes = {graph5_node(4, 2, X, Y): (X, Y) for X, Y in g.nodes()}
    assert bpg_weight(g, nodes[(3, 0, 4, 1)]) == Fraction(9, 2)
    assert bpg_weight(g, nodes[(2, 1, 4, 0)]) == 1
    assert bpg_weight(graph5(5, 0), (0, 0)) == 1


def test_ledger_n4_m2():
    ledger = diag_ledger(4, 2)
    assert [e.contribution for e in ledger] == [-36, 48, -6, 36, -18, 0]
    assert sum(e.contribution for e in ledger) == 24
    assert {e.node: e.h for e in ledger}[(2, 1, 2, 2)] == -36


@pytest.mark.parametrize("n,m,want", [(4, 2, 24), (4, 0, 8), (2, 1, 2)])
def test_diag_examples(n, m, want):
    assert diag_coeff_bpg(n, m) == want


def test_multiply_examples():
    sp = split(4)
    q = multiply(sp.i1, sp.i2)
    assert q.coeff(2, 1, 2, 0, 2) == -36
    assert q.coeff(3, 0, 3, 0, 2) == -24
    assert len(multiply(ConjPolynomial(), sp.i2)) == 0


def test_quadform_normalizes_order():
    q = QuadForm({(0, 0, 1, 0, 3): 2, (0, 0, 3, 0, 1): 5})
    assert dict(q) == {(0, 0, 3, 0, 1): 7}


def test_reduce_space_examples():
    assert reduce_space(QuadForm({(0, 0, 3, 0, 3): 5})).diagonal == {(0, 0, 3): 5}
    red = reduce_space(QuadForm({(1, 0, 1, 0, 0): 1}))
    assert red.diagonal == {(0, 1, 0): Fraction(-1, 2)}
    assert red.cross == {}
    assert red.discarded_count >= 1
    with pytest.raises(ValueError):
        reduce_space(QuadForm({(0, 0, 1, 1, 0): 1}))
    assert i1i2_reduced(4).diagonal[(2, 1, 2)] == 24


def test_diagonal_two_paths_up_to_20():
    for n in range(2, 21):
        red = i1i2_reduced(n)
        for m in range(n):
            want = Fraction(n * n, 2) * math.comb(n - 1, m)
            assert red.diagonal.get((2 * n - 2 * m - 2, 1, m)) == want
            assert diag_coeff_bpg(n, m) == want == kappa_closed(n, m)
        assert all(s % 2 == 1 for (r, s, m) in red.diagonal)


quad_terms = st.dictionaries(
    st.tuples(st.integers(0, 4), st.integers(0, 2), st.integers(0, 6), st.just(0), st.integers(0, 6)),
    st.fractions(min_value=-5, max_value=5, max_denominator=4),
    max_size=6,
)


@given(quad_terms, quad_terms)
def test_reduce_space_linear_and_diagonal(t1, t2):
    q1, q2 = QuadForm(t1), QuadForm(t2)
    r1, r2, r12 = reduce_space(q1), reduce_space(q2), reduce_space(q1 + q2)
    assert r12.cross == {}
    keys = set(r1.diagonal) | set(r2.diagonal) | set(r12.diagonal)
    for k in keys:
        assert r12.diagonal.get(k, 0) == r1.diagonal.get(k, 0) + r2.diagonal.get(k, 0)


@given(quad_terms)
def test_reduce_space_preserves_lambda_order(terms):
    # integration by parts trades one l_x for one l_xx, so r + s is conserved
    q = QuadForm(terms)
    orders = {r + s for (r, s, a, tau, b) in q}
    assert {r + s for (r, s, m) in reduce_space(q).diagonal} <= orders


def test_time_quadform_examples():
    q = time_quadform(4, 1)
    assert q.coeff(0, 0, 0, 1, 4) == 1
    assert q.coeff(1, 1, 0, 1, 1) == 12
    assert len(time_quadform(4, 0)) == 0


def test_reduce_time_examples():
    for n in range(2, 7):
        assert reduce_time(time_quadform(n, 1)).cross == {}
    assert reduce_time(time_quadform(7, 1)).cross == {(0, 3, 0): -210}
    assert reduce_time(time_quadform(9, 1)).cross == {(2, 3, 0): -7560, (0, 3, 1): 2520}
    with pytest.raises(ValueError):
        reduce_time(QuadForm({(0, 0, 2, 0, 1): 1}))


def test_cross_closed_examples():
    assert cross_coeff_closed(7, 0, 3, 0) == -210
    assert cross_coeff_closed(9, 2, 3, 0) == -7560
    assert cross_coeff_closed(9, 0, 4, 0) == 0
    with pytest.raises(ValueError):
        cross_coeff_closed(7, 0, 3, 1)


def test_cross_all_routes_up_to_15():
    for n in range(2, 16):
        red = reduce_time(time_quadform(n, 1))
        support = cross_support(n)
        assert set(red.cross) == set(support)
        assert all(s % 2 == 1 and s >= 3 and r + 2 * s + 2 * m + 1 == n for r, s, m in support)
        for key in support:
            c = cross_coeff_closed(n, *key)
            assert red.cross[key] == c
            assert cross_coeff_bpg(n, *key) == c
            assert cross_coeff_shortcut(n, *key) == c
        assert reduce_time(time_quadform(n, 1), strategy="leibniz").cross == red.cross


@given(st.integers(2, 12), st.fractions(min_value=-4, max_value=4, max_denominator=5))
def test_reduce_time_linear_in_alpha(n, alpha):
    base = reduce_time(time_quadform(n, 1)).cross
    got = reduce_time(time_quadform(n, alpha)).cross
    assert got == {k: alpha * v for k, v in base.items() if alpha * v != 0}


def test_graph6_shape():
    g = graph6(9, 2, 3, 0)
    assert (g.a_max, g.b_max) == (3, 0)


def test_leading_table():
    t4 = carleman_leading_table(4)
    assert {m: e.coeff for m, e in t4.items()} == {0: 16, 1: 48, 2: 48, 3: 16}
    assert t4[2].lambda_power == 3 and t4[2].psi_x_power == 2
    assert {m: e.coeff for m, e in carleman_leading_table(2).items()} == {0: 4, 1: 4}
    for n in range(2, 12):
        assert carleman_leading_table(n)[n - 1].coeff == n * n


def test_lower_order_table_excludes_leading():
    low = lower_order_table(5)
    assert all(k != (2 * 5 - 2 * m - 2, 1, m) for k in low for m in range(5))
    assert all(s % 2 == 1 for (r, s, m) in low)


def test_i1i2_product_is_cached_and_spatial():
    q = i1i2_product(6)
    assert all(tau == 0 and a >= b for (r, s, a, tau, b) in q)
