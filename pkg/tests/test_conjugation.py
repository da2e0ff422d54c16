import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carleman_bpm.conjugation import (
    ConjMonomial,
    ConjPolynomial,
    closed_form_polynomial,
    coeff_closed,
    conjugate_expand,
    conjugate_step,
    lambda_order,
    split,
)
from carleman_bpm.stencils import diff_full

I1_N4 = '[{"coeff":"-6/1","m":2,"r":0,"s":1},{"coeff":"-4/1","m":3,"r":1,"s":0},{"coeff":"-6/1","m":0,"r":2,"s":1},{"coeff":"-4/1","m":1,"r":3,"s":0}]'
I2_N4 = '[{"coeff":"1/1","m":4,"r":0,"s":0},{"coeff":"12/1","m":1,"r":1,"s":1},{"coeff":"6/1","m":2,"r":2,"s":0},{"coeff":"1/1","m":0,"r":4,"s":0}]'
I1_N5 = '[{"coeff":"1/1","m":5,"r":0,"s":0},{"coeff":"30/1","m":2,"r":1,"s":1},{"coeff":"10/1","m":3,"r":2,"s":0},{"coeff":"10/1","m":0,"r":3,"s":1},{"coeff":"5/1","m":1,"r":4,"s":0}]'
I2_N5 = '[{"coeff":"-10/1","m":3,"r":0,"s":1},{"coeff":"-5/1","m":4,"r":1,"s":0},{"coeff":"-30/1","m":1,"r":2,"s":1},{"coeff":"-10/1","m":2,"r":3,"s":0},{"coeff":"-1/1","m":0,"r":5,"s":0}]'


def test_step_examples():
    w = ConjPolynomial({(0, 0, 0): 1})
    once = conjugate_step(w)
    assert once == ConjPolynomial({(0, 0, 1): 1, (1, 0, 0): -1})
    assert conjugate_step(once) == ConjPolynomial({(0, 0, 2): 1, (1, 0, 1): -2, (2, 0, 0): 1, (0, 1, 0): -1})
    assert conjugate_step(ConjPolynomial()) == ConjPolynomial()


def test_expand_examples():
    assert conjugate_expand(0) == ConjPolynomial({(0, 0, 0): 1})
    assert conjugate_expand(4).coeff(1, 1, 1) == 12
    assert conjugate_expand(5).coeff(2, 1, 1) == -30


@pytest.mark.parametrize("args,want", [((4, 1, 1, 1), 12), ((7, 0, 0, 7), 1), ((5, 2, 1, 1), -30), ((5, 1, 1, 1), 0)])
def test_coeff_closed_examples(args, want):
    assert coeff_closed(*args) == want


def test_expansion_matches_closed_form_up_to_30():
    p = ConjPolynomial({(0, 0, 0): 1})
    for n in range(31):
        if n:
            p = conjugate_step(p)
        assert p == closed_form_polynomial(n), n
        assert all(r + 2 * s + m == n for r, s, m in p)
        assert all(c != 0 for c in p.values())


@given(st.integers(0, 18))
def test_theta_one_collapse(n):
    flat = conjugate_expand(n).filter(lambda r, s, m: r == 0 and s == 0)
    assert flat == ConjPolynomial({(0, 0, n): 1})


@given(st.integers(2, 20))
def test_split_partitions_expansion(n):
    sp = split(n)
    assert sp.total == conjugate_expand(n)
    assert all((s == 0 and m % 2) or (s == 1 and m % 2 == 0) for r, s, m in sp.i1)
    assert all((s == 0 and m % 2 == 0) or (s == 1 and m % 2) for r, s, m in sp.i2)
    assert all(s >= 2 for r, s, m in sp.i3)
    assert not set(sp.i1) & set(sp.i2)


def test_split_canonical_serializations():
    assert split(4).i1.to_json() == I1_N4
    assert split(4).i2.to_json() == I2_N4
    assert split(5).i1.to_json() == I1_N5
    assert split(5).i2.to_json() == I2_N5
    assert split(2).i3 == ConjPolynomial()


def test_split_dict_form():
    assert dict(split(4).i1) == {(1, 0, 3): -4, (3, 0, 1): -4, (0, 1, 2): -6, (2, 1, 0): -6}
    assert dict(split(5).i2) == {(1, 0, 4): -5, (3, 0, 2): -10, (5, 0, 0): -1, (0, 1, 3): -10, (2, 1, 1): -30}


def test_json_round_trip():
    p = conjugate_expand(9)
    assert ConjPolynomial.from_records(p.to_records()) == p


def test_latex_lists_the_four_terms():
    tex = split(4).i1.to_latex()
    for piece in (r"4\ell_x\partial_x^{3}w", r"4\ell_x^{3}\partial_xw", r"6\ell_{xx}\partial_x^{2}w", r"6\ell_x^{2}\ell_{xx}w"):
        assert piece in tex


@pytest.mark.parametrize("rsm,want", [((3, 1, 0), 4), ((0, 0, 5), 0), ((2, 1, 1), 3)])
def test_lambda_order(rsm, want):
    assert lambda_order(ConjMonomial(Fraction(1), *rsm)) == want


def test_split_rejects_small_n():
    with pytest.raises(ValueError):
        split(1)


@pytest.mark.parametrize("n", range(2, 7))
def test_substitution_numeric(n):
    # theta d^n v against the expansion applied to w = theta v; coarse grid keeps d^6 roundoff small
    lam, x0 = 0.7, 1.25
    x = np.linspace(0.0, 1.0, 101)
    h = x[1] - x[0]
    theta = np.exp(lam * (x - x0) ** 2)
    v = np.sin(3 * x) + x**2
    dnv = {0: v, 1: 3 * np.cos(3 * x) + 2 * x, 2: -9 * np.sin(3 * x) + 2}
    for k in range(3, n + 1):
        dnv[k] = 3 ** k * np.sin(3 * x + k * math.pi / 2)
    lx = lam * 2 * (x - x0)
    lxx = 2 * lam
    w = theta * v
    dw = [diff_full(w, m, h, accuracy=8) for m in range(n + 1)]
    got = sum(float(c) * lx**r * lxx**s * dw[m] for (r, s, m), c in conjugate_expand(n).items())
    want = theta * dnv[n]
    inner = slice(10, -10)
    assert np.max(np.abs(got - want)[inner]) < 1e-4 * np.max(np.abs(want))
