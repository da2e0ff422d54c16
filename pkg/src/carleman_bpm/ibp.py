"""Integration-by-parts calculus for the bilinear forms I1*I2 and w_t*I2.

Two independent routes compute every coefficient:

* a term-rewriting reduction (:func:`reduce_space`, :func:`reduce_time`) that
  applies single integration-by-parts steps until only canonical terms remain,
  discarding (and counting) exact x- and t-derivatives;
* back-propagation grids (:class:`BPGrid`), where a coefficient is the sum
  over monotone lattice paths of products of edge weights, combined with the
  raw product coefficients ``h`` (:func:`diag_coeff_bpg`, :func:`cross_coeff_bpg`).

Terms are ``coeff * l_x^r l_xx^s * d_x^a (d_t^tau w) * d_x^b w`` with
``tau in {0, 1}``.  Because l_xxx = 0 and l_tx = 0, the x-derivative of the
weight factor is ``r l_x^{r-1} l_xx^{s+1}`` and its t-derivative vanishes.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType

from .combinatorics import binom, to_ratio_str
from .conjugation import ConjPolynomial, split

__all__ = [
    "QuadTerm",
    "QuadForm",
    "ReducedForm",
    "BPGrid",
    "LedgerEntry",
    "LeadingEntry",
    "bpg_weight",
    "graph5",
    "graph5_node",
    "graph6",
    "graph6_node",
    "diag_ledger",
    "diag_coeff_bpg",
    "multiply",
    "space_step",
    "reduce_space",
    "time_quadform",
    "time_step",
    "reduce_time",
    "cross_support",
    "cross_coeff_closed",
    "cross_coeff_shortcut",
    "cross_ledger",
    "cross_coeff_bpg",
    "i1i2_reduced",
    "carleman_leading_table",
    "lower_order_table",
]

QKey = tuple[int, int, int, int, int]  # (r, s, a, tau, b)
DKey = tuple[int, int, int]  # (r, s, m)


@dataclass(frozen=True)
class QuadTerm:
    coeff: Fraction
    r: int
    s: int
    a: int
    tau: int
    b: int

    @property
    def key(self) -> QKey:
        return (self.r, self.s, self.a, self.tau, self.b)


def _normalize(key: QKey) -> QKey:
    r, s, a, tau, b = key
    if tau not in (0, 1):
        raise ValueError(f"tau must be 0 or 1, got {tau}")
    if min(r, s, a, b) < 0:
        raise ValueError(f"negative index in {key}")
    if tau == 0 and a < b:
        return (r, s, b, 0, a)
    return key


class QuadForm(Mapping[QKey, Fraction]):
    """Sparse bilinear form keyed by ``(r, s, a, tau, b)``.

    Spatial terms (tau = 0) are symmetric in the two factors and are stored
    with ``a >= b``; keys given the other way round are merged by addition.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[QKey, Fraction | int] | Iterable[tuple[QKey, Fraction | int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[QKey, Fraction] = {}
        for key, c in items:
            k = _normalize(tuple(key))
            acc[k] = acc.get(k, Fraction(0)) + Fraction(c)
        self._terms = MappingProxyType({k: acc[k] for k in sorted(acc) if acc[k] != 0})

    def __getitem__(self, key: QKey) -> Fraction:
        return self._terms[_normalize(key)]

    def __contains__(self, key: object) -> bool:
        try:
            return _normalize(key) in self._terms  # type: ignore[arg-type]
        except (TypeError, ValueError):
            return False

    def __iter__(self) -> Iterator[QKey]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, r: int, s: int, a: int, tau: int, b: int) -> Fraction:
        return self._terms.get(_normalize((r, s, a, tau, b)), Fraction(0))

    def terms(self) -> list[QuadTerm]:
        return [QuadTerm(c, *k) for k, c in self._terms.items()]

    def scale(self, c: Fraction | int) -> QuadForm:
        return QuadForm({k: v * c for k, v in self._terms.items()})

    def __add__(self, other: QuadForm) -> QuadForm:
        return QuadForm(list(self._terms.items()) + list(other._terms.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, QuadForm):
            return dict(self._terms) == dict(other._terms)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        return f"QuadForm({dict(self._terms)!r})"

    def to_records(self) -> list[dict]:
        return [
            {"r": r, "s": s, "a": a, "tau": tau, "b": b, "coeff": to_ratio_str(c)}
            for (r, s, a, tau, b), c in self._terms.items()
        ]


def _records(d: Mapping[DKey, Fraction]) -> list[dict]:
    return [{"r": r, "s": s, "m": m, "coeff": to_ratio_str(c)} for (r, s, m), c in sorted(d.items())]


@dataclass(frozen=True)
class ReducedForm:
    """Canonical output of the reduction.

    ``diagonal[(r, s, m)]`` multiplies ``l_x^r l_xx^s (d_x^m w)^2``;
    ``cross[(r, s, m)]`` multiplies ``l_x^r l_xx^s d_x^m d_t w * d_x^{m+1} w``.
    """

    diagonal: Mapping[DKey, Fraction] = field(default_factory=dict)
    cross: Mapping[DKey, Fraction] = field(default_factory=dict)
    discarded_count: int = 0

    def to_dict(self) -> dict:
        return {
            "diagonal": _records(self.diagonal),
            "cross": _records(self.cross),
            "discarded_count": self.discarded_count,
        }


def _clean(d: dict[DKey, Fraction]) -> dict[DKey, Fraction]:
    return {k: d[k] for k in sorted(d) if d[k] != 0}


# ---------------------------------------------------------------- BP grids


@dataclass(frozen=True)
class BPGrid:
    """Rectangular back-propagation grid.

    ``r_weights[(X, Y)]`` labels the edge (X, Y) -> (X-1, Y) and
    ``s_weights[(X, Y)]`` the edge (X, Y) -> (X, Y-1).  Missing weights are 0.
    """

    a_max: int
    b_max: int
    r_weights: Mapping[tuple[int, int], Fraction]
    s_weights: Mapping[tuple[int, int], Fraction]

    def nodes(self) -> list[tuple[int, int]]:
        return [(x, y) for x in range(self.a_max + 1) for y in range(self.b_max + 1)]


def bpg_weight(g: BPGrid, start: tuple[int, int]) -> Fraction:
    """Total path weight from ``start`` to (0, 0) by dynamic programming."""
    A, B = start
    if not (0 <= A <= g.a_max and 0 <= B <= g.b_max):
        raise ValueError(f"start {start} outside grid {g.a_max}x{g.b_max}")
    zero = Fraction(0)
    F = [[zero] * (B + 1) for _ in range(A + 1)]
    for X in range(A + 1):
        for Y in range(B + 1):
            if X == 0 and Y == 0:
                F[0][0] = Fraction(1)
                continue
            val = zero
            if X > 0:
                val += Fraction(g.r_weights.get((X, Y), 0)) * F[X - 1][Y]
            if Y > 0:
                val += Fraction(g.s_weights.get((X, Y), 0)) * F[X][Y - 1]
            F[X][Y] = val
    return F[A][B]


def _check_nm(n: int, m: int) -> None:
    if n < 2 or not 0 <= m <= n - 1:
        raise ValueError(f"need n >= 2 and 0 <= m <= n-1, got n={n}, m={m}")


def graph5(n: int, m: int) -> BPGrid:
    """Two-row grid whose goal is ``l_x^{p-1} l_xx (d_x^m w)^2`` with p = 2n-2m-1.

    Row 0 holds ``l_x^{p-1} l_xx d^{m+Y} w d^{m-Y} w``, row 1 holds
    ``l_x^p d^{m+1+Y} w d^{m-Y} w`` (see :func:`graph5_node`).
    """
    _check_nm(n, m)
    p = 2 * n - 2 * m - 1
    r_w = {(1, 0): Fraction(-p, 2)}
    r_w.update({(1, y): Fraction(-p) for y in range(1, m + 1)})
    s_w = {(x, y): Fraction(-1) for x in (0, 1) for y in range(1, m + 1)}
    return BPGrid(1, m, r_w, s_w)


def graph5_node(n: int, m: int, X: int, Y: int) -> tuple[int, int, int, int]:
    """Spatial term ``(r, s, a, b)`` sitting at grid node (X, Y) of :func:`graph5`."""
    p = 2 * n - 2 * m - 1
    if X == 0:
        return (p - 1, 1, m + Y, m - Y)
    return (p, 0, m + 1 + Y, m - Y)


@dataclass(frozen=True)
class LedgerEntry:
    """One node's share of a BPG coefficient: ``h * g``."""

    node: tuple[int, ...]
    h: Fraction
    g: Fraction

    @property
    def contribution(self) -> Fraction:
        return self.h * self.g


def diag_ledger(n: int, m: int) -> list[LedgerEntry]:
    """Per-node ``h`` (raw I1*I2 coefficient) and ``g`` (grid weight) for d_m."""
    grid = graph5(n, m)
    prod = i1i2_product(n)
    out = []
    for X in (0, 1):
        for Y in range(m + 1):
            r, s, a, b = graph5_node(n, m, X, Y)
            out.append(LedgerEntry((r, s, a, b), prod.coeff(r, s, a, 0, b), bpg_weight(grid, (X, Y))))
    return out


def diag_coeff_bpg(n: int, m: int) -> Fraction:
    """Leading diagonal coefficient d_m via the back-propagation grid."""
    return sum((e.contribution for e in diag_ledger(n, m)), Fraction(0))


# ---------------------------------------------------------------- spatial reduction


def multiply(p: ConjPolynomial, q: ConjPolynomial) -> QuadForm:
    """Product of two w-polynomials as a spatial bilinear form."""
    out: list[tuple[QKey, Fraction]] = []
    for (r1, s1, m1), c1 in p.items():
        for (r2, s2, m2), c2 in q.items():
            out.append(((r1 + r2, s1 + s2, m1, 0, m2), c1 * c2))
    return QuadForm(out)


@lru_cache(maxsize=None)
def i1i2_product(n: int) -> QuadForm:
    sp = split(n)
    return multiply(sp.i1, sp.i2)


def space_step(r: int, s: int, a: int, b: int) -> list[tuple[tuple[int, int, int, int], Fraction]]:
    """One integration by parts on ``l_x^r l_xx^s d^a w d^b w`` with a > b.

    Returns the surviving terms (an exact x-derivative is dropped).  For
    a = b + 1 the result is diagonal, keyed with a = b.
    """
    if a <= b:
        raise ValueError("space_step needs a > b")
    if a == b + 1:
        # A d^{b+1}w d^b w = (A (d^b w)^2 / 2)_x - A_x (d^b w)^2 / 2
        return [((r - 1, s + 1, b, b), Fraction(-r, 2))] if r else []
    out = [((r, s, a - 1, b + 1), Fraction(-1))]
    if r:
        out.append(((r - 1, s + 1, a - 1, b), Fraction(-r)))
    return out


def reduce_space(q: QuadForm) -> ReducedForm:
    """Reduce a spatial form to diagonal terms modulo exact x-derivatives.

    Terms are processed in decreasing order of the gap a - b; every step
    produces strictly smaller gaps, so one sweep suffices.
    """
    pending: dict[tuple[int, int, int, int], Fraction] = {}
    for (r, s, a, tau, b), c in q.items():
        if tau != 0:
            raise ValueError("reduce_space accepts only tau = 0 terms")
        pending[(r, s, a, b)] = pending.get((r, s, a, b), Fraction(0)) + c
    diagonal: dict[DKey, Fraction] = {}
    discarded = 0
    while pending:
        gap = max(a - b for (_, _, a, b) in pending)
        level = [k for k in pending if k[2] - k[3] == gap]
        for key in level:
            c = pending.pop(key)
            r, s, a, b = key
            if c == 0:
                continue
            if gap == 0:
                diagonal[(r, s, a)] = diagonal.get((r, s, a), Fraction(0)) + c
                continue
            discarded += 1
            for (r2, s2, a2, b2), w in space_step(r, s, a, b):
                if a2 == b2 and gap == 1:
                    diagonal[(r2, s2, a2)] = diagonal.get((r2, s2, a2), Fraction(0)) + c * w
                else:
                    pending[(r2, s2, a2, b2)] = pending.get((r2, s2, a2, b2), Fraction(0)) + c * w
    return ReducedForm(_clean(diagonal), {}, discarded)


@lru_cache(maxsize=None)
def i1i2_reduced(n: int) -> ReducedForm:
    """Canonical form of I1*I2 for the given order n."""
    return reduce_space(i1i2_product(n))


# ---------------------------------------------------------------- time reduction


def time_quadform(n: int, alpha: Fraction | int = 1) -> QuadForm:
    """alpha * w_t * I2 as a bilinear form with tau = 1 on the first factor."""
    if n < 2:
        raise ValueError("n must be >= 2")
    alpha = Fraction(alpha)
    return QuadForm({(r, s, 0, 1, m): alpha * c for (r, s, m), c in split(n).i2.items()})


def time_step(r: int, s: int, a: int, b: int) -> list[tuple[tuple[int, int, int, int], Fraction]]:
    """One integration by parts on ``l_x^r l_xx^s d^a d_t w d^b w`` toward |b - a| <= 1.

    For b > a + 1 a derivative is moved off the spatial factor onto the
    time factor; for a > b one is moved the other way.
    """
    if b >= a + 2:
        out = [((r, s, a + 1, b - 1), Fraction(-1))]
        if r:
            out.append(((r - 1, s + 1, a, b - 1), Fraction(-r)))
        return out
    if a > b:
        out = [((r, s, a - 1, b + 1), Fraction(-1))]
        if r:
            out.append(((r - 1, s + 1, a - 1, b), Fraction(-r)))
        return out
    raise ValueError("time term is already canonical")


def _leibniz_time(r: int, s: int, a: int, b: int) -> list[tuple[tuple[int, int, int, int], Fraction]]:
    # Move k derivatives at once: A U d^k V == (-1)^k sum_j C(k,j) A^{(j)} d^{k-j}U V
    if b >= a + 2:
        k = (b - a) // 2
        out = []
        for j in range(min(k, r) + 1):
            fall = math.perm(r, j)
            out.append(((r - j, s + j, a + k - j, b - k), Fraction((-1) ** k * binom(k, j) * fall)))
        return out
    if a > b:
        k = (a - b + 1) // 2
        out = []
        for j in range(min(k, r) + 1):
            fall = math.perm(r, j)
            out.append(((r - j, s + j, a - k, b + k - j), Fraction((-1) ** k * binom(k, j) * fall)))
        return out
    raise ValueError("time term is already canonical")


def reduce_time(q: QuadForm, strategy: str = "stepwise") -> ReducedForm:
    """Reduce a time form to cross terms modulo exact x- and t-derivatives.

    Canonical survivors are ``d^m d_t w d^{m+1} w`` (cross).  A term
    ``d^m d_t w d^m w`` equals ``((d^m w)^2 / 2)_t`` times a t-independent
    weight and is discarded.  ``strategy`` is ``"stepwise"`` (one derivative
    per step) or ``"leibniz"`` (several derivatives per step).
    """
    steps = {"stepwise": time_step, "leibniz": _leibniz_time}
    try:
        step = steps[strategy]
    except KeyError:
        raise ValueError(f"unknown strategy {strategy!r}") from None
    pending: dict[tuple[int, int, int, int], Fraction] = {}
    for (r, s, a, tau, b), c in q.items():
        if tau != 1:
            raise ValueError("reduce_time accepts only tau = 1 terms")
        pending[(r, s, a, b)] = pending.get((r, s, a, b), Fraction(0)) + c
    heap = [(-abs(k[3] - k[2]), k) for k in pending]
    heapq.heapify(heap)
    cross: dict[DKey, Fraction] = {}
    discarded = 0
    while heap:
        _, key = heapq.heappop(heap)
        c = pending.pop(key, Fraction(0))
        if c == 0:
            continue
        r, s, a, b = key
        if b == a + 1:
            cross[(r, s, a)] = cross.get((r, s, a), Fraction(0)) + c
            continue
        discarded += 1
        if b == a:
            continue
        for k2, w in step(r, s, a, b):
            if k2 not in pending:
                heapq.heappush(heap, (-abs(k2[3] - k2[2]), k2))
            pending[k2] = pending.get(k2, Fraction(0)) + c * w
    return ReducedForm({}, _clean(cross), discarded)


def cross_support(n: int) -> list[DKey]:
    """The set D_C: r + 2s + 2m + 1 = n with s odd and s >= 3."""
    out = []
    for s in range(3, n, 2):
        for m in range(n):
            r = n - 2 * s - 2 * m - 1
            if r >= 0:
                out.append((r, s, m))
    return sorted(out)


def _check_cross_stratum(n: int, r: int, s: int, m: int) -> None:
    if min(r, s, m) < 0 or r + 2 * s + 2 * m + 1 != n:
        raise ValueError(f"(r, s, m) = {(r, s, m)} is not on r+2s+2m+1 = {n}")


def _rising(r: int, count: int) -> int:
    out = 1
    for j in range(1, count + 1):
        out *= r + j
    return out


def cross_coeff_closed(n: int, r: int, s: int, m: int) -> Fraction:
    """Closed-form cross coefficient d_C(r, s, m); zero for even s."""
    _check_cross_stratum(n, r, s, m)
    if s % 2 == 0:
        return Fraction(0)
    return (
        (-1) ** (n + m)
        * Fraction((s - 1) * (2 * m + s) * (n - 2 * m - s - 1), 2 * (m + s))
        * binom(n, 2 * m + s + 1)
        * binom(m + s, s)
        * _rising(r, s - 1)
    )


def cross_coeff_shortcut(n: int, r: int, s: int, m: int) -> Fraction:
    """d_C from only the two bottom-right grid nodes, with their h and g in closed form."""
    _check_cross_stratum(n, r, s, m)
    if s % 2 == 0 or s < 1:
        return Fraction(0)
    return Fraction(
        (-1) ** (n + m)
        * (
            binom(s + m - 1, s - 1) * binom(n, 2) * binom(n - 2, 2 * m + s)
            - binom(s + m, s) * (r + s) * binom(n, 2 * m + s + 1)
        )
        * _rising(r, s - 1)
    )


def graph6(n: int, r: int, s: int, m: int) -> BPGrid:
    """(s+1)-row grid whose goal is the cross term ``l_x^r l_xx^s d^m d_t w d^{m+1} w``."""
    _check_cross_stratum(n, r, s, m)
    r_w = {(x, y): Fraction(-(r + x)) for x in range(1, s + 1) for y in range(m + 1)}
    s_w = {(x, y): Fraction(-1) for x in range(s + 1) for y in range(1, m + 1)}
    return BPGrid(s, m, r_w, s_w)


def graph6_node(r: int, s: int, m: int, X: int, Y: int) -> QKey:
    """Time term ``(r', s', a, 1, b)`` sitting at grid node (X, Y) of :func:`graph6`."""
    return (r + X, s - X, m - Y, 1, m + 1 + X + Y)


def cross_ledger(n: int, r: int, s: int, m: int) -> list[LedgerEntry]:
    grid = graph6(n, r, s, m)
    form = time_quadform(n, 1)
    out = []
    for X, Y in grid.nodes():
        key = graph6_node(r, s, m, X, Y)
        out.append(LedgerEntry(key, form.coeff(*key), bpg_weight(grid, (X, Y))))
    return out


def cross_coeff_bpg(n: int, r: int, s: int, m: int) -> Fraction:
    """d_C(r, s, m) summed over the full grid (h from w_t * I2 with alpha = 1)."""
    return sum((e.contribution for e in cross_ledger(n, r, s, m)), Fraction(0))


# ---------------------------------------------------------------- tables


@dataclass(frozen=True)
class LeadingEntry:
    """Coefficient of ``lambda^{lambda_power} psi_x^{psi_x_power} psi_xx |d_x^m w|^2``."""

    m: int
    coeff: Fraction
    lambda_power: int
    psi_x_power: int
    psi_xx_power: int = 1

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "coeff": to_ratio_str(self.coeff),
            "lambda_power": self.lambda_power,
            "psi_x_power": self.psi_x_power,
            "psi_xx_power": self.psi_xx_power,
        }


def carleman_leading_table(n: int, alpha: Fraction | int = 1) -> dict[int, LeadingEntry]:
    """Leading energy coefficients 2*d_m of 2*I1*I2, read from the reduction.

    The w_t * I2 part contributes nothing at leading order, so ``alpha`` does
    not enter; it is accepted for interface symmetry.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    red = i1i2_reduced(n)
    out = {}
    for m in range(n):
        c = 2 * red.diagonal.get((2 * n - 2 * m - 2, 1, m), Fraction(0))
        out[m] = LeadingEntry(m, c, 2 * n - 2 * m - 1, 2 * n - 2 * m - 2)
    return out


def lower_order_table(n: int) -> dict[DKey, Fraction]:
    """Every diagonal coefficient of I1*I2 except the leading s = 1 stratum."""
    red = i1i2_reduced(n)
    lead = {(2 * n - 2 * m - 2, 1, m) for m in range(n)}
    return {k: v for k, v in red.diagonal.items() if k not in lead}
