"""Desk-scale numerical checks of the weighted inequality for alpha d_t + d_x^n.

Fields live on a uniform tensor grid over [0, T] x [0, L] with axis 0 = t and
axis 1 = x.  Weighted integrands are evaluated as ``exp(2 lambda psi - s)``
times data, with ``s = 2 max(lambda psi)`` over the support; ``s`` is
reported as ``log_scale`` and cancels in every ratio.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import simpson

from .conjugation import ConjPolynomial, split
from .ibp import QuadForm, carleman_leading_table, i1i2_product, i1i2_reduced, reduce_time, time_quadform
from .stencils import diff_central

__all__ = [
    "Grid",
    "FieldSample",
    "WeightSpec",
    "CarlemanReport",
    "ConvertedReport",
    "default_weight",
    "bump",
    "apply_operator",
    "DEFAULT_CENTER",
    "DEFAULT_RADII",
    "weight_log_derivative",
    "weighted_dx",
    "leading_lhs",
    "carleman_sides",
    "lambda_sweep",
    "converted_check",
    "empirical_threshold",
    "verify_config",
    "spectral_dx",
    "conservation_check",
]


@dataclass(frozen=True)
class Grid:
    T: float = 1.0
    L: float = 1.0
    Nt: int = 201
    Nx: int = 201

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.Nt)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.Nx)

    @property
    def ht(self) -> float:
        return self.T / (self.Nt - 1)

    @property
    def hx(self) -> float:
        return self.L / (self.Nx - 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.t, self.x, indexing="ij")

    def refined(self) -> Grid:
        return Grid(self.T, self.L, 2 * self.Nt - 1, 2 * self.Nx - 1)


@dataclass(frozen=True)
class FieldSample:
    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.Nt, self.grid.Nx):
            raise ValueError("values shape does not match grid")

    def __add__(self, other: FieldSample) -> FieldSample:
        return FieldSample(self.grid, self.values + other.values)

    def __mul__(self, c: float) -> FieldSample:
        return FieldSample(self.grid, self.values * c)

    __rmul__ = __mul__

    def margin(self) -> int:
        """Smallest number of all-zero layers at any of the four edges."""
        v = self.values != 0
        if not v.any():
            return min(self.values.shape)
        rows = np.flatnonzero(v.any(axis=1))
        cols = np.flatnonzero(v.any(axis=0))
        nt, nx = self.values.shape
        return int(min(rows[0], nt - 1 - rows[-1], cols[0], nx - 1 - cols[-1]))


@dataclass(frozen=True)
class WeightSpec:
    """psi = (x - x0)^2 - beta (t - t0)^2 and the large parameter lambda."""

    x0: float
    t0: float
    beta: float
    lam: float
    T: float = 1.0
    L: float = 1.0

    def __post_init__(self) -> None:
        if self.beta <= 0 or self.lam <= 0:
            raise ValueError("beta and lambda must be positive")
        if not self.x0 > self.L:
            raise ValueError("need x0 > L so psi_x does not vanish on [0, L]")
        if not 0 < self.t0 < self.T:
            raise ValueError("need 0 < t0 < T")

    def with_lambda(self, lam: float) -> WeightSpec:
        return WeightSpec(self.x0, self.t0, self.beta, lam, self.T, self.L)

    def psi(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        return (x - self.x0) ** 2 - self.beta * (t - self.t0) ** 2

    def psi_x(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (x - self.x0)

    psi_xx = 2.0


def default_weight(T: float = 1.0, L: float = 1.0, lam: float = 1.0) -> WeightSpec:
    """t0 = T/2, x0 = L + 1/4, beta = 4 x0^2 / T^2 + 1."""
    x0 = L + 0.25
    return WeightSpec(x0, T / 2, 4 * x0**2 / T**2 + 1, lam, T, L)


# support t in [0.1, 0.8], x in [0.1, 0.9]; off-centre in t so the alpha cross term survives
DEFAULT_CENTER = (0.45, 0.5)
DEFAULT_RADII = (0.35, 0.4)


def _bump1d(rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho, dtype=float)
    inside = np.abs(rho) < 1
    out[inside] = np.exp(-1.0 / (1.0 - rho[inside] ** 2))
    return out


def bump(center: tuple[float, float], radii: tuple[float, float], grid: Grid) -> FieldSample:
    """Product of standard bumps exp(-1/(1 - rho^2)) in t and x; peak e^{-2}."""
    (tc, xc), (rt, rx) = center, radii
    if rt <= 0 or rx <= 0:
        raise ValueError("radii must be positive")
    if tc - rt <= 0 or tc + rt >= grid.T or xc - rx <= 0 or xc + rx >= grid.L:
        raise ValueError("bump support must lie strictly inside the domain")
    tt, xx = grid.mesh()
    return FieldSample(grid, _bump1d((tt - tc) / rt) * _bump1d((xx - xc) / rx))


def apply_operator(v: FieldSample, alpha: float, n: int) -> FieldSample:
    """alpha d_t v + d_x^n v by central differences of accuracy 4."""
    g = v.grid
    dt = diff_central(v.values, 1, g.ht, axis=0)
    dxn = diff_central(v.values, n, g.hx, axis=1)
    return FieldSample(g, float(alpha) * dt + dxn)


def _integrate(f: np.ndarray, grid: Grid) -> float:
    return float(simpson(simpson(f, dx=grid.hx, axis=1), dx=grid.ht))


@dataclass(frozen=True)
class CarlemanReport:
    lam: float
    lhs_leading: float
    rhs: float
    ratio: float
    per_m_breakdown: dict[int, float]
    log_scale: float = 0.0

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "lhs_leading": self.lhs_leading,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "per_m_breakdown": {str(k): v for k, v in self.per_m_breakdown.items()},
            "log_scale": self.log_scale,
        }


def _weight_shift(v: FieldSample, weight: WeightSpec) -> tuple[np.ndarray, float]:
    tt, xx = v.grid.mesh()
    lpsi = weight.lam * weight.psi(tt, xx)
    support = v.values != 0
    shift = float(lpsi[support].max()) if support.any() else 0.0
    return lpsi, shift


def weight_log_derivative(k: int, lx: np.ndarray, lxx: float) -> np.ndarray:
    """theta^{-1} d_x^k theta = sum_{r+2s=k} k!/(r! s! 2^s) l_x^r l_xx^s (l_xxx = 0)."""
    out = np.zeros_like(lx)
    for s in range(k // 2 + 1):
        r = k - 2 * s
        out = out + math.factorial(k) / (math.factorial(r) * math.factorial(s) * 2**s) * lx**r * lxx**s
    return out


def weighted_dx(v: FieldSample, weight: WeightSpec, m: int, shift: float = 0.0, method: str = "fd") -> np.ndarray:
    """d_x^m of ``w = exp(lam psi - shift) v``.

    ``"fd"`` differentiates the sampled ``w`` directly; ``"leibniz"`` applies
    the Leibniz rule with exact weight derivatives, so only ``v`` is
    differenced.  The two routes check each other.
    """
    g = v.grid
    tt, xx = g.mesh()
    with np.errstate(under="ignore"):
        theta = np.exp(weight.lam * weight.psi(tt, xx) - shift)
    if method == "fd":
        return diff_central(theta * v.values, m, g.hx, axis=1)
    if method == "leibniz":
        lx = weight.lam * weight.psi_x(xx)
        lxx = weight.lam * weight.psi_xx
        acc = np.zeros_like(xx)
        for j in range(m + 1):
            acc += math.comb(m, j) * weight_log_derivative(m - j, lx, lxx) * diff_central(v.values, j, g.hx, axis=1)
        return theta * acc
    raise ValueError(f"unknown derivative method {method!r}")


def leading_lhs(
    dw: dict[int, np.ndarray], grid: Grid, weight: WeightSpec, n: int, lam: float | None = None
) -> dict[int, float]:
    """Per-m integrals of n^2 C(n-1,m) lam^{2n-2m-1} psi_x^{2n-2m-2} psi_xx |d^m w|^2.

    ``dw[m]`` holds sampled ``d_x^m w``; coefficients come from the exact
    reduction table.  ``lam`` overrides the weight's lambda (for scaling
    studies at fixed w).
    """
    lam = weight.lam if lam is None else lam
    _, xx = grid.mesh()
    px = weight.psi_x(xx)
    out = {}
    for m, entry in carleman_leading_table(n).items():
        integrand = float(entry.coeff) * lam**entry.lambda_power * px**entry.psi_x_power * weight.psi_xx * dw[m] ** 2
        out[m] = _integrate(integrand, grid)
    return out


def carleman_sides(v: FieldSample, weight: WeightSpec, alpha: float, n: int, method: str = "fd") -> CarlemanReport:
    """Both sides of the weighted inequality for one lambda, in common scaled units."""
    lpsi, shift = _weight_shift(v, weight)
    with np.errstate(under="ignore"):
        theta = np.exp(lpsi - shift)
    dw = {m: weighted_dx(v, weight, m, shift, method) for m in range(n)}
    per_m = leading_lhs(dw, v.grid, weight, n)
    lhs = sum(per_m.values())
    pv = apply_operator(v, alpha, n).values
    rhs = _integrate(theta**2 * pv**2, v.grid)
    if lhs != 0:
        ratio = rhs / lhs
    else:
        ratio = math.nan if rhs == 0 else math.inf
    return CarlemanReport(weight.lam, lhs, rhs, ratio, per_m, 2 * shift)


def lambda_sweep(weight: WeightSpec, octaves: int = 3, per_octave: int = 2, target: float = 40.0) -> list[float]:
    """Geometric sweep lam_base * 2^(k/per_octave), lam_base with 2 lam max|psi| ~ target."""
    tt, xx = np.meshgrid([0.0, weight.t0, weight.T], [0.0, weight.L], indexing="ij")
    psi_max = float(np.abs(weight.psi(tt, xx)).max())
    base = target / (2 * psi_max)
    return [base * 2 ** (k / per_octave) for k in range(octaves * per_octave + 1)]


def empirical_threshold(lams: Sequence[float], ratios: Sequence[float], tol: float = 0.05) -> float | None:
    """Smallest sampled lambda from which ``ratio >= 1 - tol`` holds for the rest of the sweep."""
    star = None
    for lam, q in sorted(zip(lams, ratios), reverse=True):
        if not q >= 1 - tol:
            break
        star = lam
    return star


@dataclass
class ConvertedReport:
    lambdas: list[float]
    q: list[float]
    empirical_c: float
    bounded: bool
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "lambdas": self.lambdas,
            "q": [None if math.isnan(x) else x for x in self.q],
            "empirical_C": None if math.isnan(self.empirical_c) else self.empirical_c,
            "bounded": self.bounded,
            "degenerate": self.degenerate,
            "notes": self.notes,
        }


def converted_check(
    v: FieldSample, weight: WeightSpec, alpha: float, n: int, lambda_list: Sequence[float], growth_tol: float = 0.05
) -> ConvertedReport:
    """Q(lam) = sum_m lam^{2n-2m-1} int e^{2 lam psi}|d^m v|^2 / int e^{2 lam psi}|P v|^2.

    Boundedness fails when Q grows monotonically, by more than ``growth_tol``
    overall, across the top octave of the sweep.
    """
    g = v.grid
    pv = apply_operator(v, alpha, n).values
    dv = {m: diff_central(v.values, m, g.hx, axis=1) for m in range(n)}
    qs = []
    for lam in lambda_list:
        lpsi, shift = _weight_shift(v, weight.with_lambda(lam))
        with np.errstate(under="ignore"):
            e2 = np.exp(2 * lpsi - 2 * shift)
        num = sum(lam ** (2 * n - 2 * m - 1) * _integrate(e2 * dv[m] ** 2, g) for m in range(n))
        den = _integrate(e2 * pv**2, g)
        qs.append(num / den if den != 0 else math.nan)
    lams = list(lambda_list)
    if all(math.isnan(q) for q in qs):
        return ConvertedReport(lams, qs, math.nan, True, True, ["0/0 for every lambda"])
    top = [q for lam, q in zip(lams, qs) if lam >= max(lams) / 2 and not math.isnan(q)]
    growing = len(top) >= 2 and all(b > a for a, b in zip(top, top[1:])) and top[-1] > (1 + growth_tol) * top[0]
    return ConvertedReport(lams, qs, float(np.nanmax(qs)), not growing)


def verify_config(
    n: int,
    alpha: float,
    grid: Grid | None = None,
    weight: WeightSpec | None = None,
    lambdas: Sequence[float] | None = None,
    center: tuple[float, float] = DEFAULT_CENTER,
    radii: tuple[float, float] = DEFAULT_RADII,
    tol: float = 0.05,
) -> dict:
    """Run the inequality sweep and the converted-form check for one (n, alpha)."""
    grid = grid or Grid()
    weight = weight or default_weight(grid.T, grid.L)
    lambdas = list(lambdas) if lambdas is not None else lambda_sweep(weight)
    v = bump(center, radii, grid)
    reports = [carleman_sides(v, weight.with_lambda(lam), alpha, n) for lam in lambdas]
    checks = [carleman_sides(v, weight.with_lambda(lam), alpha, n, method="leibniz") for lam in lambdas]
    ratios = [r.ratio for r in reports]
    lam_star = empirical_threshold(lambdas, ratios, tol)
    lam_star_leibniz = empirical_threshold(lambdas, [r.ratio for r in checks], tol)
    records = []
    for r, c in zip(reports, checks):
        rec = r.to_dict()
        rec["lhs_leading_leibniz"] = c.lhs_leading * math.exp(c.log_scale - r.log_scale)
        rec["ratio_leibniz"] = c.ratio
        records.append(rec)
    conv = converted_check(v, weight, alpha, n, lambdas)
    return {
        "config": {
            "n": n,
            "alpha": alpha,
            "grid": {"T": grid.T, "L": grid.L, "Nt": grid.Nt, "Nx": grid.Nx},
            "weight": {"x0": weight.x0, "t0": weight.t0, "beta": weight.beta},
            "bump": {"center": list(center), "radii": list(radii)},
            "tol": tol,
        },
        "records": records,
        "lambda_star": lam_star,
        "lambda_star_leibniz": lam_star_leibniz,
        "converted": conv.to_dict(),
        "empirical_C": conv.to_dict()["empirical_C"],
        "properties": {
            "threshold_exists": lam_star is not None,
            "q_bounded": conv.bounded,
        },
        "pass": lam_star is not None and conv.bounded,
    }


# ---------------------------------------------------------------- conservation bridge


def spectral_dx(values: np.ndarray, order: int, length: float, axis: int) -> np.ndarray:
    """Fourier derivative on a periodic grid of the given period (endpoint excluded)."""
    if order == 0:
        return np.array(values, dtype=float)
    N = values.shape[axis]
    k = 2j * np.pi * np.fft.fftfreq(N, d=length / N)
    if N % 2 == 0 and order % 2 == 1:
        k[N // 2] = 0.0
    shape = [1] * values.ndim
    shape[axis] = N
    fk = np.fft.fft(values, axis=axis) * (k**order).reshape(shape)
    return np.real(np.fft.ifft(fk, axis=axis))


def _bump_sum(tt: np.ndarray, xx: np.ndarray, params: Sequence[tuple[float, float, float, float, float]]) -> np.ndarray:
    out = np.zeros_like(tt)
    for amp, tc, xc, rt, rx in params:
        out += amp * _bump1d((tt - tc) / rt) * _bump1d((xx - xc) / rx)
    return out


def conservation_check(
    n: int,
    params: Sequence[tuple[float, float, float, float, float]],
    lam: float = 1.0,
    alpha: float = 1.0,
    sizes: Sequence[tuple[int, int]] = ((64, 1024), (64, 2048)),
    weight: WeightSpec | None = None,
) -> list[dict]:
    """Compare space-time integrals of the raw and reduced forms of I1*I2 and alpha w_t I2.

    ``w = e^{lam psi} v`` with ``v`` a sum of bumps ``(amp, tc, xc, rt, rx)``;
    derivatives and quadrature are spectral on the periodic extension, which is
    smooth because ``w`` is compactly supported.  One record per grid size.
    """
    weight = weight or default_weight(lam=lam)
    space_form = i1i2_product(n)
    space_red = i1i2_reduced(n)
    time_form = time_quadform(n, Fraction(alpha).limit_denominator())
    time_red = reduce_time(time_form)
    out = []
    for Nt, Nx in sizes:
        t = np.arange(Nt) * weight.T / Nt
        x = np.arange(Nx) * weight.L / Nx
        tt, xx = np.meshgrid(t, x, indexing="ij")
        v = _bump_sum(tt, xx, params)
        w = np.exp(lam * weight.psi(tt, xx)) * v
        wt = spectral_dx(w, 1, weight.T, axis=0)
        maxd = 2 * n
        dw = [spectral_dx(w, k, weight.L, axis=1) for k in range(maxd + 1)]
        dwt = [spectral_dx(wt, k, weight.L, axis=1) for k in range(maxd + 1)]
        lx = lam * weight.psi_x(xx)
        lxx = lam * weight.psi_xx
        cell = (weight.T / Nt) * (weight.L / Nx)

        def integral(f: np.ndarray) -> float:
            return float(f.sum() * cell)

        raw_s = integral(_eval_quad(space_form, lx, lxx, dw, dwt))
        red_s = integral(sum((float(c) * lx**r * lxx**s * dw[m] ** 2 for (r, s, m), c in space_red.diagonal.items()), np.zeros_like(w)))
        raw_t = integral(_eval_quad(time_form, lx, lxx, dw, dwt))
        red_t = integral(
            sum((float(c) * lx**r * lxx**s * dwt[m] * dw[m + 1] for (r, s, m), c in time_red.cross.items()), np.zeros_like(w))
        )
        # scale for the time form: it may reduce to exactly zero
        scale_t = integral(np.abs(wt) * np.abs(_eval_poly(split(n).i2, lx, lxx, dw)))
        out.append(
            {
                "Nt": Nt,
                "Nx": Nx,
                "space_raw": raw_s,
                "space_reduced": red_s,
                "space_rel_err": abs(raw_s - red_s) / abs(red_s),
                "time_raw": raw_t,
                "time_reduced": red_t,
                "time_rel_err": abs(raw_t - red_t) / scale_t,
            }
        )
    return out


def _eval_poly(p: ConjPolynomial, lx, lxx, dw) -> np.ndarray:
    return sum((float(c) * lx**r * lxx**s * dw[m] for (r, s, m), c in p.items()), np.zeros_like(dw[0]))


def _eval_quad(q: QuadForm, lx, lxx, dw, dwt) -> np.ndarray:
    out = np.zeros_like(dw[0])
    for (r, s, a, tau, b), c in q.items():
        first = dwt[a] if tau else dw[a]
        out += float(c) * lx**r * lxx**s * first * dw[b]
    return out
