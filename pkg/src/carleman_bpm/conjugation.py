"""Expansion of the conjugated derivative theta * d_x^n * theta^{-1} acting on w.

With the quadratic weight ``psi = (x-x0)^2 - beta (t-t0)^2`` and ``l = lambda psi``
every third x-derivative of ``l`` vanishes, so the expansion lives in the
monomial alphabet ``l_x^r l_xx^s d_x^m w``.  A polynomial is stored sparsely,
keyed by ``(r, s, m)``.
"""

from __future__ import annotations

import json
import math
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from types import MappingProxyType

from .combinatorics import binom, to_ratio_str

__all__ = [
    "ConjMonomial",
    "ConjPolynomial",
    "OperatorSplit",
    "conjugate_step",
    "conjugate_expand",
    "coeff_closed",
    "closed_form_polynomial",
    "split",
    "lambda_order",
    "latex_monomial",
]

Key = tuple[int, int, int]


@dataclass(frozen=True)
class ConjMonomial:
    coeff: Fraction
    r: int
    s: int
    m: int

    @property
    def key(self) -> Key:
        return (self.r, self.s, self.m)


class ConjPolynomial(Mapping[Key, Fraction]):
    """Immutable sparse sum of ``coeff * l_x^r l_xx^s d_x^m w`` terms.

    Zero coefficients are dropped on construction; iteration is in
    lexicographic ``(r, s, m)`` order.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Key, Fraction | int] | Iterable[tuple[Key, Fraction | int]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Key, Fraction] = {}
        for key, c in items:
            r, s, m = key
            if min(r, s, m) < 0:
                raise ValueError(f"negative exponent in {key}")
            acc[(r, s, m)] = acc.get((r, s, m), Fraction(0)) + Fraction(c)
        self._terms = MappingProxyType({k: acc[k] for k in sorted(acc) if acc[k] != 0})

    def __getitem__(self, key: Key) -> Fraction:
        return self._terms[key]

    def __iter__(self) -> Iterator[Key]:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coeff(self, r: int, s: int, m: int) -> Fraction:
        return self._terms.get((r, s, m), Fraction(0))

    def monomials(self) -> list[ConjMonomial]:
        return [ConjMonomial(c, *k) for k, c in self._terms.items()]

    def __add__(self, other: ConjPolynomial) -> ConjPolynomial:
        return ConjPolynomial(list(self._terms.items()) + list(other._terms.items()))

    def __sub__(self, other: ConjPolynomial) -> ConjPolynomial:
        return self + other.scale(-1)

    def scale(self, c: Fraction | int) -> ConjPolynomial:
        return ConjPolynomial({k: v * c for k, v in self._terms.items()})

    def filter(self, pred) -> ConjPolynomial:
        return ConjPolynomial({k: v for k, v in self._terms.items() if pred(*k)})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, ConjPolynomial):
            return dict(self._terms) == dict(other._terms)
        if isinstance(other, Mapping):
            return dict(self._terms) == {k: Fraction(v) for k, v in other.items() if v != 0}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {v}" for k, v in self._terms.items())
        return f"ConjPolynomial({{{body}}})"

    def to_records(self) -> list[dict]:
        return [
            {"r": r, "s": s, "m": m, "coeff": to_ratio_str(c)}
            for (r, s, m), c in self._terms.items()
        ]

    def to_json(self) -> str:
        """Canonical JSON: sorted records, sorted keys, no whitespace."""
        return json.dumps(self.to_records(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> ConjPolynomial:
        return cls(((rec["r"], rec["s"], rec["m"]), Fraction(rec["coeff"])) for rec in records)

    def to_latex(self) -> str:
        """Render in display order: by ``s`` ascending, then ``m`` descending."""
        if not self._terms:
            return "0"
        keys = sorted(self._terms, key=lambda k: (k[1], -k[2], k[0]))
        out = []
        for i, key in enumerate(keys):
            c = self._terms[key]
            body = latex_monomial(abs(c), *key)
            if i == 0:
                out.append(("-" if c < 0 else "") + body)
            else:
                out.append(("- " if c < 0 else "+ ") + body)
        return " ".join(out)


def latex_monomial(c: Fraction, r: int, s: int, m: int) -> str:
    c = Fraction(c)
    if c == 1:
        coef = ""
    elif c.denominator == 1:
        coef = str(c.numerator)
    else:
        coef = rf"\frac{{{c.numerator}}}{{{c.denominator}}}"
    parts = [coef]
    if r == 1:
        parts.append(r"\ell_x")
    elif r > 1:
        parts.append(rf"\ell_x^{{{r}}}")
    if s == 1:
        parts.append(r"\ell_{xx}")
    elif s > 1:
        parts.append(rf"\ell_{{xx}}^{{{s}}}")
    if m == 0:
        parts.append("w")
    elif m == 1:
        parts.append(r"\partial_xw")
    else:
        parts.append(rf"\partial_x^{{{m}}}w")
    return "".join(parts)


def lambda_order(t: ConjMonomial) -> int:
    """Power of lambda carried by a monomial: every l_x and l_xx adds one."""
    return t.r + t.s


def conjugate_step(p: ConjPolynomial) -> ConjPolynomial:
    """Map theta d^n theta^{-1} w to theta d^{n+1} theta^{-1} w, i.e. f -> f_x - l_x f."""
    out: list[tuple[Key, Fraction]] = []
    for (r, s, m), c in p.items():
        # d_x(l_x^r) = r l_x^{r-1} l_xx, and d_x(l_xx) = 0
        if r:
            out.append(((r - 1, s + 1, m), c * r))
        out.append(((r, s, m + 1), c))
        out.append(((r + 1, s, m), -c))
    return ConjPolynomial(out)


@lru_cache(maxsize=None)
def conjugate_expand(n: int) -> ConjPolynomial:
    """n-fold iteration of :func:`conjugate_step` starting from ``w``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return ConjPolynomial({(0, 0, 0): 1})
    return conjugate_step(conjugate_expand(n - 1))


def coeff_closed(n: int, r: int, s: int, m: int) -> Fraction:
    """Closed-form coefficient of ``l_x^r l_xx^s d_x^m w``; 0 off the stratum r+2s+m=n."""
    if min(r, s, m) < 0 or r + 2 * s + m != n:
        return Fraction(0)
    prod = 1
    for l in range(s):
        prod *= binom(n - 2 * l, 2)
    return Fraction((-1) ** (r + s) * prod * binom(r + m, m), math.factorial(s))


def closed_form_polynomial(n: int) -> ConjPolynomial:
    """Polynomial assembled from :func:`coeff_closed` over the full stratum."""
    terms = {}
    for s in range(n // 2 + 1):
        for m in range(n - 2 * s + 1):
            r = n - 2 * s - m
            terms[(r, s, m)] = coeff_closed(n, r, s, m)
    return ConjPolynomial(terms)


@dataclass(frozen=True)
class OperatorSplit:
    i1: ConjPolynomial
    i2: ConjPolynomial
    i3: ConjPolynomial

    @property
    def total(self) -> ConjPolynomial:
        return self.i1 + self.i2 + self.i3


@lru_cache(maxsize=None)
def split(n: int) -> OperatorSplit:
    """Partition of the expansion by lambda order and derivative parity.

    ``i1``: s=0 with odd m, plus s=1 with even m.
    ``i2``: s=0 with even m, plus s=1 with odd m.
    ``i3``: everything with s >= 2.
    """
    if n < 2:
        raise ValueError("split needs n >= 2")
    full = conjugate_expand(n)
    i1 = full.filter(lambda r, s, m: (s == 0 and m % 2 == 1) or (s == 1 and m % 2 == 0))
    i2 = full.filter(lambda r, s, m: (s == 0 and m % 2 == 0) or (s == 1 and m % 2 == 1))
    i3 = full.filter(lambda r, s, m: s >= 2)
    return OperatorSplit(i1, i2, i3)
