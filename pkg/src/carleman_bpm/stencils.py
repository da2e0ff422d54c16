"""Finite-difference weights and their application to sampled fields.

Weights come from Fornberg's recursion evaluated in exact rationals, so
central stencils are exactly antisymmetric/symmetric.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "fd_weights",
    "central_offsets",
    "central_weights",
    "one_sided_weights",
    "diff_central",
    "diff_full",
    "diff_left_edge",
]


def fd_weights(order: int, offsets: tuple[int, ...], x0: int = 0) -> tuple[Fraction, ...]:
    """Weights ``c_j`` with ``f^(order)(x0) ~ sum_j c_j f(offsets[j]) / h^order``."""
    n = len(offsets)
    if order >= n:
        raise ValueError(f"{n} points cannot resolve derivative of order {order}")
    xs = [Fraction(o) for o in offsets]
    z = Fraction(x0)
    # c[j][k]: weight of node j for derivative k
    c = [[Fraction(0)] * (order + 1) for _ in range(n)]
    c[0][0] = Fraction(1)
    c1 = Fraction(1)
    c4 = xs[0] - z
    for i in range(1, n):
        mn = min(i, order)
        c2 = Fraction(1)
        c5 = c4
        c4 = xs[i] - z
        for j in range(i):
            c3 = xs[i] - xs[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2
            for k in range(mn, 0, -1):
                c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3
            c[j][0] = c4 * c[j][0] / c3
        c1 = c2
    return tuple(c[j][order] for j in range(n))


def central_offsets(order: int, accuracy: int = 4) -> tuple[int, ...]:
    if accuracy % 2:
        raise ValueError("central stencils have even accuracy")
    half = (order - 1) // 2 + accuracy // 2 if order else 0
    return tuple(range(-half, half + 1))


@lru_cache(maxsize=None)
def central_weights(order: int, accuracy: int = 4) -> tuple[tuple[int, ...], np.ndarray]:
    """Minimal-width central stencil of the given accuracy for ``d^order``."""
    offs = central_offsets(order, accuracy)
    w = fd_weights(order, offs)
    return offs, np.array([float(x) for x in w])


@lru_cache(maxsize=None)
def one_sided_weights(order: int, accuracy: int = 2) -> tuple[tuple[int, ...], np.ndarray]:
    """Forward stencil ``0..order+accuracy-1`` for ``d^order`` at the left end."""
    offs = tuple(range(order + accuracy))
    w = fd_weights(order, offs)
    return offs, np.array([float(x) for x in w])


def diff_central(values: np.ndarray, order: int, h: float, axis: int = -1, accuracy: int = 4) -> np.ndarray:
    """Central finite difference along ``axis``; requires zero data in the edge band.

    Nodes within the stencil half-width of either edge are returned as 0,
    which is exact when the input vanishes there (compact support).
    """
    values = np.asarray(values, dtype=float)
    if order == 0:
        return values.copy()
    offs, w = central_weights(order, accuracy)
    half = offs[-1]
    v = np.moveaxis(values, axis, -1)
    N = v.shape[-1]
    if N <= 2 * half:
        raise ValueError("grid too small for stencil")
    if np.any(v[..., :half] != 0) or np.any(v[..., N - half:] != 0):
        raise ValueError(f"stencil of half-width {half} overruns nonzero data at the edge")
    out = np.zeros_like(v)
    inner = out[..., half : N - half]
    for o, c in zip(offs, w):
        if c != 0:
            inner += c * v[..., half + o : N - half + o]
    out /= h**order
    return np.moveaxis(out, -1, axis)


def diff_left_edge(values: np.ndarray, order: int, h: float, axis: int = -1, accuracy: int = 2) -> np.ndarray:
    """``d^order`` at index 0 along ``axis`` from a forward stencil."""
    values = np.asarray(values, dtype=float)
    if order == 0:
        return np.take(values, 0, axis=axis)
    offs, w = one_sided_weights(order, accuracy)
    if values.shape[axis] < len(offs):
        raise ValueError(f"need {len(offs)} samples for a one-sided d^{order} of accuracy {accuracy}")
    v = np.moveaxis(values, axis, -1)
    return np.tensordot(v[..., : len(offs)], w, axes=([-1], [0])) / h**order


def diff_full(values: np.ndarray, order: int, h: float, axis: int = -1, accuracy: int = 4) -> np.ndarray:
    """``d^order`` at every node: central stencils inside, one-sided ones near the ends.

    Unlike :func:`diff_central` this makes no compact-support assumption.
    """
    values = np.asarray(values, dtype=float)
    if order == 0:
        return values.copy()
    offs, w = central_weights(order, accuracy)
    half = offs[-1]
    v = np.moveaxis(values, axis, -1)
    N = v.shape[-1]
    width = order + accuracy
    if N < max(2 * half + 1, width):
        raise ValueError(f"{N} samples cannot carry a d^{order} stencil of accuracy {accuracy}")
    out = np.empty_like(v)
    inner = np.zeros_like(v[..., half : N - half])
    for o, c in zip(offs, w):
        if c != 0:
            inner += c * v[..., half + o : N - half + o]
    out[..., half : N - half] = inner
    sign = (-1) ** order
    for i in range(half):
        left = fd_weights(order, tuple(range(-i, width - i)))
        out[..., i] = v[..., :width] @ np.array([float(c) for c in left])
        out[..., N - 1 - i] = sign * (v[..., ::-1][..., :width] @ np.array([float(c) for c in left]))
    out /= h**order
    return np.moveaxis(out, -1, axis)
