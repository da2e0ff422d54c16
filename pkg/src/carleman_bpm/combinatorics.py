"""Exact binomial calculus with the extended-zero convention.

``C(j, k)`` is ``j!/(k!(j-k)!)`` for ``0 <= k <= j`` and zero for every other
integer pair, including negative arguments.  All sums use the convention that
an empty sum is 0 and an empty product is 1.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from typing import NamedTuple

__all__ = [
    "BinomialTable",
    "IdentityCheck",
    "binom",
    "h1_sum",
    "h2_sum",
    "kappa_sum",
    "kappa_closed",
    "h1_closed",
    "h2_closed",
    "identity_sweep",
    "alt_convolution_check",
    "weighted_convolution_check",
    "to_ratio_str",
]


class BinomialTable:
    """Pascal-triangle rows built on demand.

    Rows are appended under a lock; a lookup that races a fill sees either
    the finished row or triggers the same deterministic fill.
    """

    def __init__(self) -> None:
        self._rows: list[list[int]] = [[1]]
        self._lock = threading.Lock()

    def _row(self, j: int) -> list[int]:
        if j >= len(self._rows):
            with self._lock:
                while j >= len(self._rows):
                    prev = self._rows[-1]
                    row = [1]
                    row.extend(prev[i - 1] + prev[i] for i in range(1, len(prev)))
                    row.append(1)
                    self._rows.append(row)
        return self._rows[j]

    def __call__(self, j: int, k: int) -> int:
        if j < 0 or k < 0 or k > j:
            return 0
        return self._row(j)[k]


binom = BinomialTable()


class IdentityCheck(NamedTuple):
    """Outcome of an exact identity check: both sides and their equality."""

    ok: bool
    lhs: Fraction
    rhs: Fraction

    def __bool__(self) -> bool:
        return self.ok


def to_ratio_str(q: Fraction | int) -> str:
    """Serialize an exact rational as ``"p/q"`` (denominator always present)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _check_nm(n: int, m: int) -> None:
    if not isinstance(n, int) or not isinstance(m, int):
        raise TypeError("n and m must be integers")
    if n < 2 or not 0 <= m <= n - 1:
        raise ValueError(f"need n >= 2 and 0 <= m <= n-1, got n={n}, m={m}")


def h1_sum(n: int, m: int) -> Fraction:
    """Alternating double-binomial sum H1, evaluated term by term."""
    _check_nm(n, m)
    total = -binom(n, m) * binom(n - 2, m)
    for k in range(1, m + 1):
        total -= (-1) ** k * (
            binom(n, m + k) * binom(n - 2, m - k) + binom(n, m - k) * binom(n - 2, m + k)
        )
    return Fraction(total)


def h2_sum(n: int, m: int) -> Fraction:
    """Weighted alternating sum H2, evaluated term by term."""
    _check_nm(n, m)
    total = 0
    for k in range(m + 1):
        total += (-1) ** k * (1 + 2 * k) * binom(n, m + 1 + k) * binom(n, m - k)
    return Fraction(total)


def kappa_sum(n: int, m: int) -> Fraction:
    """Leading energy coefficient K_{n,m} as the literal three-part sum."""
    _check_nm(n, m)
    c2 = binom(n, 2)
    total = Fraction(-c2 * binom(n, m) * binom(n - 2, m))
    for k in range(1, m + 1):
        total -= c2 * (-1) ** k * (
            binom(n, m + k) * binom(n - 2, m - k) + binom(n, m - k) * binom(n - 2, m + k)
        )
    tail = sum(
        (-1) ** k * (1 + 2 * k) * binom(n, m + 1 + k) * binom(n, m - k)
        for k in range(m + 1)
    )
    return total + Fraction(2 * n - 2 * m - 1, 2) * tail


def kappa_closed(n: int, m: int) -> Fraction:
    """Closed form n^2/2 * C(n-1, m)."""
    _check_nm(n, m)
    return Fraction(n * n, 2) * binom(n - 1, m)


def h1_closed(n: int, m: int) -> Fraction:
    _check_nm(n, m)
    return Fraction(binom(n - 2, m - 1) - binom(n - 2, m))


def h2_closed(n: int, m: int) -> Fraction:
    _check_nm(n, m)
    return Fraction(n * binom(n - 1, m))


def identity_sweep(max_n: int) -> list[dict]:
    """Every exact identity for 2 <= n <= max_n, 0 <= m <= n-1, one record per (n, m)."""
    if max_n < 2:
        raise ValueError("max_n must be >= 2")
    out = []
    for n in range(2, max_n + 1):
        c2 = binom(n, 2)
        for m in range(n):
            h1, h2, k = h1_sum(n, m), h2_sum(n, m), kappa_sum(n, m)
            checks = {
                "kappa": k == kappa_closed(n, m),
                "h1": h1 == h1_closed(n, m),
                "h2": h2 == h2_closed(n, m),
                "reassembly": k == c2 * h1 + Fraction(2 * n - 2 * m - 1, 2) * h2,
                "alt_convolution": alt_convolution_check(n, m).ok,
                "weighted_convolution": weighted_convolution_check(n, m).ok,
            }
            out.append({"n": n, "m": m, "kappa": to_ratio_str(k), "checks": checks, "ok": all(checks.values())})
    return out


def _check_conv(n: int, m: int) -> None:
    if n < 2 or m < 0 or 2 * m > 2 * (n - 1):
        raise ValueError(f"need n >= 2 and 0 <= m <= n-1, got n={n}, m={m}")


def alt_convolution_check(n: int, m: int) -> IdentityCheck:
    """Coefficient of x^{2m} in (1-x)^n (1+x)^{n-2} against its factored form."""
    _check_conv(n, m)
    lhs = sum((-1) ** q * binom(n, q) * binom(n - 2, 2 * m - q) for q in range(2 * m + 1))
    rhs = (-1) ** m * binom(n - 2, m) + (-1) ** (m - 1) * binom(n - 2, m - 1)
    return IdentityCheck(lhs == rhs, Fraction(lhs), Fraction(rhs))


def weighted_convolution_check(n: int, m: int) -> IdentityCheck:
    """Coefficient of x^{2m} in (1+x)^n d/dx (1-x)^n against -n(1+x)(1-x^2)^{n-1}."""
    _check_conv(n, m)
    lhs = sum(
        (-1) ** q * q * binom(n, q) * binom(n, 2 * m + 1 - q) for q in range(1, 2 * m + 2)
    )
    rhs = -n * (-1) ** m * binom(n - 1, m)
    return IdentityCheck(lhs == rhs, Fraction(lhs), Fraction(rhs))
