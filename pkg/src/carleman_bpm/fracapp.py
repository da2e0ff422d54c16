"""Caputo derivatives and the reduction of a 1/3-order diffusion problem.

The model problem is ``d_t^{1/3} u - d_x^2 u = f`` on (0,T) x (0,L) with
``u(0, x) = 0`` and Cauchy data ``h0 = u(t, 0)``, ``h1 = u_x(t, 0)``.  Applying
``d_t^{1/3}`` twice turns it into ``d_t u - d_x^6 u = f_tilde`` with extra
lateral traces ``h2..h5``.  Everything here works on uniform grids; the
Caputo derivative is the L1 product-integration scheme.

Iterated ``d^{1/3} d^{1/3}`` is always the discrete composition, never
``d^{2/3}``: they differ whenever the inner derivative does not vanish at 0.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.signal import fftconvolve

from .stencils import diff_full, diff_left_edge

__all__ = [
    "gamma_fn",
    "TimeSeries",
    "Field",
    "CauchyData",
    "LiftedData",
    "caputo",
    "caputo_series",
    "caputo_at_zero",
    "power_rule_exact",
    "power_rule_table",
    "composition_check",
    "CompositionReport",
    "boundary_lift",
    "source_transform",
    "uhat_initial_checks",
    "InitialCheckReport",
    "stability_exponent",
    "StabilityExponent",
    "Manufactured",
    "manufactured_cases",
    "negative_control",
    "lift_check",
]

THIRD = 1.0 / 3.0


def gamma_fn(x: float) -> float:
    """Gamma function for x > 0."""
    if not x > 0:
        raise ValueError(f"gamma_fn needs x > 0, got {x}")
    return math.gamma(x)


def _check_gamma(g: float) -> None:
    if not 0 < g < 1:
        raise ValueError(f"Caputo order must lie in (0, 1), got {g}")


@dataclass(frozen=True)
class TimeSeries:
    """Samples on a uniform grid ``0 = t_0 < ... < t_N = T``."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("t must be a 1-d grid with at least two nodes")
        if t[0] != 0:
            raise ValueError("t grid must start at 0")
        steps = np.diff(t)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0) or steps[0] <= 0:
            raise ValueError("t grid must be uniform and increasing")
        if v.shape != t.shape:
            raise ValueError("values must match t")

    @classmethod
    def uniform(cls, fn: Callable[[np.ndarray], np.ndarray], T: float, N: int) -> TimeSeries:
        t = np.linspace(0.0, T, N + 1)
        return cls(t, np.broadcast_to(np.asarray(fn(t), dtype=float), t.shape).copy())

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def T(self) -> float:
        return float(self.t[-1])


@dataclass(frozen=True)
class Field:
    """Space-time samples on a uniform (t, x) tensor grid; axis 0 is t."""

    t: np.ndarray
    x: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (len(self.t), len(self.x)):
            raise ValueError("values shape must be (len(t), len(x))")

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], T: float, L: float, Nt: int, Nx: int) -> Field:
        """``fn(t, x)`` on ``Nt+1`` by ``Nx+1`` nodes of [0,T] x [0,L]."""
        t = np.linspace(0.0, T, Nt + 1)
        x = np.linspace(0.0, L, Nx + 1)
        tt, xx = np.meshgrid(t, x, indexing="ij")
        return cls(t, x, np.broadcast_to(np.asarray(fn(tt, xx), dtype=float), tt.shape).copy())

    @property
    def ht(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def hx(self) -> float:
        return float(self.x[1] - self.x[0])


@dataclass(frozen=True)
class CauchyData:
    f: Field
    h0: TimeSeries
    h1: TimeSeries

    def __post_init__(self) -> None:
        for h in (self.h0, self.h1):
            if h.t.shape != self.f.t.shape or not np.allclose(h.t, self.f.t):
                raise ValueError("Cauchy data must share the time grid of f")
        if self.f.t[0] != 0:
            raise ValueError("f must be sampled from t = 0")


@dataclass(frozen=True)
class LiftedData:
    h2: TimeSeries
    h3: TimeSeries
    h4: TimeSeries
    h5: TimeSeries
    f1: np.ndarray
    f_tilde: Field


# ---------------------------------------------------------------- Caputo / L1


def _l1_weights(n: int, g: float) -> np.ndarray:
    j = np.arange(n, dtype=float)
    return (j + 1) ** (1 - g) - j ** (1 - g)


def caputo(z: TimeSeries, gamma: float, t_index: int) -> float:
    """L1 approximation of ``d_t^gamma z`` at ``t[t_index]``.

    ``h^{-g}/Gamma(2-g) * sum_{j<k} b_j (z_{k-j} - z_{k-j-1})`` with
    ``b_j = (j+1)^{1-g} - j^{1-g}``, exact for piecewise-linear ``z``.
    """
    _check_gamma(gamma)
    k = int(t_index)
    if not 1 <= k < len(z.t):
        raise ValueError(f"t_index must be in [1, {len(z.t) - 1}]")
    b = _l1_weights(k, gamma)
    d = np.diff(z.values[: k + 1])[::-1]
    return float(b @ d) * z.h ** (-gamma) / math.gamma(2 - gamma)


def _wynn_epsilon(seq: np.ndarray) -> np.ndarray:
    """Limit of ``seq`` along axis 0 by Wynn's epsilon algorithm (last even column)."""
    cur = np.asarray(seq, dtype=float)
    prev = np.zeros_like(cur)
    scale = np.maximum(np.abs(cur).max(axis=0), np.finfo(float).tiny)
    best = cur[-1].copy()
    col = 0
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        while cur.shape[0] > 1:
            d = cur[1:] - cur[:-1]
            # a converged difference ends that column: inf propagates and is masked below
            tiny = ~(np.abs(d) > 1e-13 * scale)
            nxt = prev[1 : cur.shape[0]] + np.where(tiny, np.inf, 1.0 / np.where(tiny, 1.0, d))
            prev, cur = cur, nxt
            col += 1
            if col % 2 == 0:
                best = np.where(np.isfinite(cur[-1]), cur[-1], best)
    return best


def caputo_at_zero(values: np.ndarray, gamma: float, h: float, axis: int = 0, levels: int = 7) -> np.ndarray:
    """``lim_{t->0+} d_t^gamma z`` as ``Gamma(1+gamma) * lim (z(t) - z(0)) / t^gamma``.

    The ratio is sampled at ``t = 2^j h`` (j < levels), where a sum of powers
    ``t^e`` becomes a sum of geometric sequences in j, and the limit is taken
    with Wynn's epsilon algorithm.  Works on the samples directly, so the
    start-up error of the L1 sum never enters.

    Wynn's algorithm would also strip terms with ``e < 0``; when the
    residuals against the extrapolated limit grow geometrically toward
    ``t = 0`` the ratio is declared divergent and ``+-inf`` is returned.
    """
    _check_gamma(gamma)
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    idx = 2 ** np.arange(levels)
    if v.shape[0] <= idx[-1]:
        raise ValueError(f"need more than {idx[-1]} time steps")
    t = (h * idx).reshape((levels,) + (1,) * (v.ndim - 1))
    ratio = (v[idx] - v[0]) / t**gamma
    lim = _wynn_epsilon(ratio)
    res = ratio[:4] - lim
    scale = np.maximum(np.abs(ratio).max(axis=0), 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = res[:-1] / res[1:]
    # a stripped t^e term with e < 0: one-signed residuals growing by a steady 2^{-e} toward t = 0
    diverging = (
        (np.abs(res[0]) > 1e-10 * scale)
        & np.all(q > 2**0.05, axis=0)
        & (q.max(axis=0) < 1.25 * q.min(axis=0))
    )
    lim = np.where(diverging, np.copysign(np.inf, ratio[0]), lim)
    return math.gamma(1 + gamma) * lim


def caputo_series(values: np.ndarray, gamma: float, h: float, axis: int = 0, fill_zero: bool = True) -> np.ndarray:
    """L1 Caputo derivative at every node along ``axis``.

    The node ``t = 0`` carries no L1 sum; with ``fill_zero`` it receives
    :func:`caputo_at_zero` (the node-1 value if that diverges), so the series
    can be fed back in as a continuous function for iterated derivatives.
    """
    _check_gamma(gamma)
    v = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    N = v.shape[0] - 1
    if N < 1:
        raise ValueError("need at least two time nodes")
    b = _l1_weights(N, gamma)
    d = np.diff(v, axis=0)
    b = b.reshape((N,) + (1,) * (v.ndim - 1))
    conv = fftconvolve(b, d, axes=0)[:N] if v.ndim > 1 else fftconvolve(b.ravel(), d)[:N]
    out = np.zeros_like(v)
    out[1:] = conv * h ** (-gamma) / math.gamma(2 - gamma)
    if fill_zero and N > 64:
        lim = caputo_at_zero(v, gamma, h)
        # a derivative that blows up at 0 has no value to fill; keep it finite
        out[0] = np.where(np.isfinite(lim), lim, out[1])
    return np.moveaxis(out, 0, axis)



def power_rule_exact(mu: float, gamma: float, t: np.ndarray) -> np.ndarray:
    """``d^gamma t^mu = Gamma(1+mu)/Gamma(1+mu-gamma) t^{mu-gamma}`` (mu > 0)."""
    with np.errstate(divide="ignore"):
        return gamma_fn(1 + mu) / gamma_fn(1 + mu - gamma) * np.asarray(t, dtype=float) ** (mu - gamma)


# errors at this level are rounding, so no convergence order is meaningful
ROUNDING_FLOOR = 1e-12


def _orders(errs: Sequence[float]) -> list[float | None]:
    out: list[float | None] = []
    for a, b in zip(errs, errs[1:]):
        out.append(None if b <= ROUNDING_FLOOR or a <= ROUNDING_FLOOR else math.log2(a / b))
    return out


def _window(t: np.ndarray, T: float) -> np.ndarray:
    return t >= T / 4 - 1e-12


def power_rule_table(
    gamma: float, mu: float, sizes: Sequence[int] = (256, 512, 1024, 2048, 4096), T: float = 1.0
) -> dict:
    """Refinement study of L1 on ``t^mu``: max relative error on [T/4, T] per N."""
    errs = []
    for N in sizes:
        z = TimeSeries.uniform(lambda t: t**mu, T, N)
        num = caputo_series(z.values, gamma, z.h, fill_zero=False)
        sel = _window(z.t, T)
        ex = power_rule_exact(mu, gamma, z.t[sel])
        errs.append(float(np.max(np.abs(num[sel] - ex) / np.abs(ex))))
    orders = _orders(errs)
    finite = [o for o in orders if o is not None]
    exact = errs[-1] <= ROUNDING_FLOOR
    ok = errs[-1] < 1e-3 and (exact or (bool(finite) and finite[-1] >= 1.0))
    return {
        "gamma": gamma,
        "mu": mu,
        "rows": [{"N": N, "max_rel_err": e} for N, e in zip(sizes, errs)],
        "observed_orders": orders,
        "exact_to_rounding": exact,
        "pass": ok,
    }


# ---------------------------------------------------------------- composition


@dataclass
class CompositionReport:
    gamma1: float
    gamma2: float
    max_rel_discrepancy: float
    z0: float
    inner_at_zero: float
    hypotheses_ok: bool
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "gamma1": self.gamma1,
            "gamma2": self.gamma2,
            "max_rel_discrepancy": self.max_rel_discrepancy,
            "z0": self.z0,
            "inner_at_zero": self.inner_at_zero,
            "hypotheses_ok": self.hypotheses_ok,
            "notes": self.notes,
        }


def composition_check(z: TimeSeries, gamma1: float, gamma2: float, hyp_tol: float = 1e-3) -> CompositionReport:
    """Compare ``d^{g2} d^{g1} z`` (composed L1) with ``d^{g1+g2} z`` on [T/4, T].

    When ``g1 + g2 = 1`` the right side is the ordinary derivative, taken by
    second-order differences.  Violated hypotheses ``z(0) = d^{g1} z(0) = 0``
    are reported, not raised.
    """
    if not (gamma1 > 0 and gamma2 > 0 and gamma1 + gamma2 <= 1 + 1e-12):
        raise ValueError("need gamma1, gamma2 > 0 and gamma1 + gamma2 <= 1")
    _check_gamma(gamma1)
    _check_gamma(gamma2)
    inner = caputo_series(z.values, gamma1, z.h)
    lhs = caputo_series(inner, gamma2, z.h)
    total = gamma1 + gamma2
    if abs(total - 1) <= 1e-12:
        rhs = diff_full(z.values, 1, z.h, accuracy=2)
    else:
        rhs = caputo_series(z.values, total, z.h)
    sel = _window(z.t, z.T)
    scale = float(np.max(np.abs(rhs[sel])))
    diff = float(np.max(np.abs(lhs[sel] - rhs[sel])))
    rel = diff / scale if scale > 0 else diff
    zscale = max(1.0, float(np.max(np.abs(z.values))))
    z0 = float(z.values[0])
    inner0 = float(inner[0])
    notes = []
    if abs(z0) > hyp_tol * zscale:
        notes.append("z(0) != 0")
    if abs(inner0) > hyp_tol * max(1.0, float(np.max(np.abs(inner)))):
        notes.append("inner derivative does not vanish at t = 0")
    return CompositionReport(gamma1, gamma2, rel, z0, inner0, not notes, notes)


# ---------------------------------------------------------------- lifting


def _ts(t: np.ndarray, v: np.ndarray) -> TimeSeries:
    return TimeSeries(t, v)


def boundary_lift(d: CauchyData, accuracy: int = 4, delta: float | None = None) -> LiftedData:
    """Traces h2..h5 of u_xx..d_x^5 u at x = 0, plus the transformed source."""
    f = d.f
    need = 3 + accuracy
    if len(f.x) < need:
        raise ValueError(f"need at least {need} x-samples for one-sided d_x^3 of accuracy {accuracy}")
    h = f.ht
    fx = [diff_left_edge(f.values, k, f.hx, axis=1, accuracy=accuracy) for k in range(4)]
    c = lambda v: caputo_series(v, THIRD, h)  # noqa: E731
    h2 = c(d.h0.values) - fx[0]
    h3 = c(d.h1.values) - fx[1]
    h4 = c(c(d.h0.values)) - c(fx[0]) - fx[2]
    h5 = c(c(d.h1.values)) - c(fx[1]) - fx[3]
    f1, f_tilde = source_transform(f, delta=delta, accuracy=accuracy)
    t = f.t
    return LiftedData(_ts(t, h2), _ts(t, h3), _ts(t, h4), _ts(t, h5), f1, f_tilde)


def source_transform(f: Field, delta: float | None = None, accuracy: int = 4) -> tuple[np.ndarray, Field]:
    """``f1 = (d_x^2 + d_t^{1/3}) f(0, .)`` and ``f_tilde`` on the rows ``t >= delta``.

    ``f_tilde = t^{-2/3} f(0,.)/Gamma(1/3) + t^{-1/3} f1/Gamma(2/3)
    + (d_x^4 + d_t^{1/3} d_x^2 + d_t^{1/3} d_t^{1/3}) f``.  ``delta``
    defaults to T/100 and must be positive.
    """
    T = float(f.t[-1])
    delta = T / 100 if delta is None else float(delta)
    if not delta > 0:
        raise ValueError("f_tilde is singular at t = 0; delta must be positive")
    if f.t[0] != 0:
        raise ValueError("f must be sampled from t = 0")
    h = f.ht
    fxx = diff_full(f.values, 2, f.hx, axis=1, accuracy=accuracy)
    fxxxx = diff_full(f.values, 4, f.hx, axis=1, accuracy=accuracy)
    cf = caputo_series(f.values, THIRD, h)
    f1 = fxx[0] + cf[0]
    ccf = caputo_series(cf, THIRD, h)
    cfxx = caputo_series(fxx, THIRD, h)
    rows = f.t >= delta - 1e-12 * T
    t = f.t[rows][:, None]
    ft = (
        t ** (-2 / 3) * f.values[0] / gamma_fn(THIRD)
        + t ** (-THIRD) * f1 / gamma_fn(2 / 3)
        + fxxxx[rows]
        + cfxx[rows]
        + ccf[rows]
    )
    return f1, Field(f.t[rows], f.x, ft)


@dataclass
class InitialCheckReport:
    uhat_at_zero: float
    d13_at_zero: float
    d23_at_zero: float
    tol: float
    checks: dict[str, bool]

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        return {
            "uhat_at_zero": self.uhat_at_zero,
            "d13_uhat_at_zero": self.d13_at_zero,
            "d23_uhat_at_zero": self.d23_at_zero,
            "tol": self.tol,
            "checks": dict(self.checks),
            "pass": self.passed,
        }


def uhat_initial_checks(u: Field, f: Field, tol: float = 1e-3, accuracy: int = 4) -> InitialCheckReport:
    """Form ``uhat = u - 3 t^{1/3} f(0)/Gamma(1/3) - (3/2) t^{2/3} f1/Gamma(2/3)``
    and test ``uhat``, ``d^{1/3} uhat`` and ``d^{2/3} uhat`` at t -> 0+.

    Limits come from :func:`caputo_at_zero`; tolerances scale with
    ``max(1, max|u|)``.
    """
    if u.values.shape != f.values.shape:
        raise ValueError("u and f must share a grid")
    fxx = diff_full(f.values, 2, f.hx, axis=1, accuracy=accuracy)
    f1 = fxx[0] + caputo_series(f.values, THIRD, f.ht)[0]
    t = u.t[:, None]
    uhat = (
        u.values
        - 3 / gamma_fn(THIRD) * t**THIRD * f.values[0]
        - 1.5 / gamma_fn(2 / 3) * t ** (2 / 3) * f1
    )
    scale = max(1.0, float(np.max(np.abs(u.values))))
    a0 = float(np.max(np.abs(uhat[0])))
    a1 = float(np.max(np.abs(caputo_at_zero(uhat, THIRD, u.ht))))
    a2 = float(np.max(np.abs(caputo_at_zero(uhat, 2 / 3, u.ht))))
    thr = tol * scale
    checks = {"uhat_vanishes": a0 <= thr, "d13_vanishes": a1 <= thr, "d23_vanishes": a2 <= thr}
    return InitialCheckReport(a0, a1, a2, thr, checks)


# ---------------------------------------------------------------- exponents


class StabilityExponent(NamedTuple):
    tau: float
    lambda_tilde: Callable[[float, float], float]
    rule: str


def stability_exponent(epsilon: float, c: float) -> StabilityExponent:
    """Hoelder exponent ``tau = 2 eps/(eps + c)`` and the rule ``lambda(M, F) = 2/(eps+c) ln(M/F)``."""
    if not (epsilon > 0 and c > 0):
        raise ValueError("epsilon and c must be positive")
    k = 2.0 / (epsilon + c)

    def lambda_tilde(M: float, F: float) -> float:
        if not (M > 0 and F > 0):
            raise ValueError("M and F must be positive")
        return k * math.log(M / F)

    return StabilityExponent(2.0 * epsilon / (epsilon + c), lambda_tilde, f"lambda = {k!r} * ln(M/F)")


# ---------------------------------------------------------------- manufactured data


@dataclass(frozen=True)
class Manufactured:
    """Exact solution of the 1/3-order problem with everything needed to check the lift.

    ``traces[j]`` is ``d_x^j u(t, 0)`` for j = 0..5 and ``reduced_rhs`` is
    ``d_t u - d_x^6 u``, the exact value of ``f_tilde``.
    """

    name: str
    u: Callable[[np.ndarray, np.ndarray], np.ndarray]
    f: Callable[[np.ndarray, np.ndarray], np.ndarray]
    traces: tuple[Callable[[np.ndarray], np.ndarray], ...]
    reduced_rhs: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None


def _zero(t: np.ndarray) -> np.ndarray:
    return np.zeros_like(t)


def manufactured_cases() -> dict[str, Manufactured]:
    g = gamma_fn
    sq = lambda t: t**2  # noqa: E731
    return {
        "t_x2": Manufactured(
            "t_x2",
            lambda t, x: t * x**2,
            lambda t, x: x**2 * t ** (2 / 3) / g(5 / 3) - 2 * t,
            (_zero, _zero, lambda t: 2 * t, _zero, _zero, _zero),
            lambda t, x: x**2 + 0 * t,
        ),
        "t2_exp": Manufactured(
            "t2_exp",
            lambda t, x: t**2 * np.exp(x),
            lambda t, x: (2 / g(8 / 3) * t ** (5 / 3) - t**2) * np.exp(x),
            (sq,) * 6,
            lambda t, x: (2 * t - t**2) * np.exp(x),
        ),
        "fractional_powers": Manufactured(
            "fractional_powers",
            lambda t, x: t ** (2 / 3) * np.sin(x) + t**THIRD * x**3,
            lambda t, x: (g(5 / 3) / g(4 / 3) * t**THIRD + t ** (2 / 3)) * np.sin(x)
            + g(4 / 3) * x**3
            - 6 * x * t**THIRD,
            (
                _zero,
                lambda t: t ** (2 / 3),
                _zero,
                lambda t: 6 * t**THIRD - t ** (2 / 3),
                _zero,
                lambda t: t ** (2 / 3),
            ),
            lambda t, x: (2 / 3) * t ** (-THIRD) * np.sin(x) + THIRD * t ** (-2 / 3) * x**3 + t ** (2 / 3) * np.sin(x),
        ),
    }


def negative_control() -> Manufactured:
    """u = x^2 solves the equation with f = -2 but violates u(0, x) = 0."""
    return Manufactured(
        "x2_negative",
        lambda t, x: x**2 + 0 * t,
        lambda t, x: -2.0 + 0 * (t + x),
        (_zero, _zero, lambda t: 2.0 + 0 * t, _zero, _zero, _zero),
    )


def lift_check(case: Manufactured, T: float = 1.0, L: float = 1.0, Nt: int = 4096, Nx: int = 64, tol: float = 1e-3) -> dict:
    """Push a manufactured pair through :func:`boundary_lift` and the initial checks."""
    f = Field.sample(case.f, T, L, Nt, Nx)
    u = Field.sample(case.u, T, L, Nt, Nx)
    h0 = TimeSeries(f.t, case.traces[0](f.t))
    h1 = TimeSeries(f.t, case.traces[1](f.t))
    lift = boundary_lift(CauchyData(f, h0, h1))
    sel = _window(f.t, T)
    errs = {}
    for j, hj in zip((2, 3, 4, 5), (lift.h2, lift.h3, lift.h4, lift.h5)):
        ex = case.traces[j](f.t[sel])
        errs[f"h{j}"] = float(np.max(np.abs(hj.values[sel] - ex)) / max(1.0, float(np.max(np.abs(ex)))))
    init = uhat_initial_checks(u, f, tol=tol)
    out = {
        "case": case.name,
        "grid": {"T": T, "L": L, "Nt": Nt, "Nx": Nx},
        "trace_rel_err": errs,
        "initial_checks": init.to_dict(),
    }
    ok = init.passed and all(e < tol for e in errs.values())
    if case.reduced_rhs is not None:
        ft = lift.f_tilde
        rows = _window(ft.t, T)
        tt, xx = np.meshgrid(ft.t[rows], ft.x, indexing="ij")
        ex = case.reduced_rhs(tt, xx)
        out["f_tilde_rel_err"] = float(np.max(np.abs(ft.values[rows] - ex)) / np.max(np.abs(ex)))
        ok = ok and out["f_tilde_rel_err"] < tol
    out["pass"] = bool(ok)
    return out
