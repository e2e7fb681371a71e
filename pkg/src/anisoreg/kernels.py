"""Jump-measure families, their tails and the cusp kernel.

Four families are supported:

``Axes``
    jumps only along coordinate axes with density ``(2-a_k)|h|^(-1-a_k)``.
``ProductStable``
    d = 3; an isotropic planar stable density in ``(x1, x2)`` plus an
    axis density in ``x3``.
``DoubleExponent``
    two axis densities per coordinate, exponents ``alpha_k`` and ``beta_k``.
``Cusp``
    d = 2; the absolutely continuous kernel ``C |z|^(-2-gamma) 1_Gamma(z)``.

Every measure is described internally by a list of *axis terms*
(one-dimensional densities living on a coordinate line) and *plane terms*
(two-dimensional densities living on a coordinate plane).  Integrals against
singular parts therefore always reduce to one-dimensional integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate, special

from .geometry import AnisoBox, ExponentVector, aniso_box

__all__ = [
    "CoefficientField",
    "CuspParams",
    "AxisTerm",
    "PlaneTerm",
    "JumpMeasure",
    "Axes",
    "ProductStable",
    "DoubleExponent",
    "Cusp",
    "SingularDensity",
    "TailMass",
    "MomentResult",
    "cusp_params",
    "in_gamma",
    "cusp_kernel",
    "mu_axes_tail_exact",
    "tail_mass",
    "mass_outside_box",
    "moment_condition",
    "mu_eval_density",
    "make_measure",
    "plane_strip_integral",
]

_TAIL_REL = 1e-9


# ---------------------------------------------------------------------------
# coefficient field


@dataclass(frozen=True)
class CoefficientField:
    """Symmetric coefficient ``a(t, x, y)`` with values in ``[1/2, 1]``.

    ``spatial`` is False when ``a`` depends on ``t`` only; energy code uses this
    to fold ``a`` into a scalar factor.
    """

    func: Callable = field(compare=False)
    spatial: bool = False
    name: str = "custom"

    def __call__(self, t, x=None, y=None):
        return self.func(t, x, y)

    def scalar(self, t: float) -> float:
        if self.spatial:
            raise ValueError(f"coefficient {self.name!r} depends on space")
        return float(self.func(t, None, None))

    def validate(self, d: int, samples: int = 256, seed: int = 0) -> None:
        rng = np.random.default_rng(seed)
        t = rng.uniform(-2.0, 2.0, samples)
        x = rng.uniform(-3.0, 3.0, (samples, d))
        y = rng.uniform(-3.0, 3.0, (samples, d))
        a = np.broadcast_to(np.asarray(self.func(t, x, y), dtype=float), t.shape)
        b = np.broadcast_to(np.asarray(self.func(t, y, x), dtype=float), t.shape)
        if np.any(a < 0.5) or np.any(a > 1.0):
            raise ValueError(f"coefficient {self.name!r} leaves [1/2, 1]")
        if not np.allclose(a, b, rtol=0, atol=1e-14):
            raise ValueError(f"coefficient {self.name!r} is not symmetric")

    @classmethod
    def constant(cls, value: float = 1.0) -> "CoefficientField":
        if not 0.5 <= value <= 1.0:
            raise ValueError("constant coefficient must lie in [1/2, 1]")
        return cls(lambda t, x, y, _v=float(value): np.full(np.shape(t), _v), False, f"const({value})")

    @classmethod
    def stock(cls) -> "CoefficientField":
        """``3/4 + cos(t)/4``."""
        return cls(lambda t, x, y: 0.75 + 0.25 * np.cos(t), False, "stock")


UNIT = CoefficientField.constant(1.0)


# ---------------------------------------------------------------------------
# cusp parameters


@dataclass(frozen=True)
class CuspParams:
    gamma: float
    b1: float
    b2: float
    C: float

    def swapped(self) -> "CuspParams":
        return CuspParams(self.gamma, self.b2, self.b1, self.C)

    @classmethod
    def isotropic(cls, alpha: float) -> "CuspParams":
        """Full-plane stable density ``(2-alpha)|z|^(-2-alpha)``."""
        return cls(float(alpha), 1.0, 1.0, 2.0 - float(alpha))


def cusp_params(alpha1: float, alpha2: float, alpha0: float | None = None) -> CuspParams:
    ExponentVector((alpha1, alpha2), alpha0)
    if alpha1 == alpha2:
        # exact b = 1; the general formula leaves round-off that drops the diagonal from Gamma
        return CuspParams.isotropic(alpha1)
    lo = min(alpha1, alpha2)
    gamma = (abs(alpha1 - alpha2) + alpha1 * alpha2) / lo
    b1 = 1.0 / (1.0 + gamma - alpha1)
    b2 = 1.0 / (1.0 + gamma - alpha2)
    C = 1.0 - gamma + 1.0 / max(b1, b2)
    return CuspParams(gamma, b1, b2, C)


def in_gamma(z, params: CuspParams) -> np.ndarray:
    z = np.abs(np.asarray(z, dtype=float))
    z1, z2 = z[..., 0], z[..., 1]
    return (z2 <= z1 ** (1.0 / params.b1)) | (z1 <= z2 ** (1.0 / params.b2))


def cusp_kernel(z, params: CuspParams) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    n = np.hypot(z[..., 0], z[..., 1])
    if np.any(n == 0):
        raise ValueError("the cusp kernel is singular at z = 0")
    out = np.where(in_gamma(z, params), params.C * n ** (-2.0 - params.gamma), 0.0)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# strip integrals of |z|^(-2-gamma) over Gamma
#
# For an outer abscissa a > 0, the admissible set of |z_other| is
# [0, t1] U [t2, inf) with t1 = a^(1/b1), t2 = a^b2 when a < 1, and everything
# when a >= 1.  The inner integral of (a^2 + s^2)^(-(2+gamma)/2) is an
# incomplete beta function.


def _radial_pieces(a, s, gamma):
    """Return (int_0^s, int_s^inf) of (a^2+s^2)^(-(2+gamma)/2) ds.

    Hypergeometric forms in ``s/a`` (below ``a``) and ``a/s`` (above) keep
    every factor in range when ``a`` is tiny and ``gamma`` large.
    """
    a, s = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(s, dtype=float))
    p = 1.0 + 0.5 * gamma
    small = s < a
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        la = np.log(a)
        full = np.exp((1.0 - 2.0 * p) * la + math.log(0.5 * special.beta(0.5, p - 0.5)))
        x = np.where(small, s / a, 0.0)
        low = np.where(s > 0, np.exp(np.log(s) - 2.0 * p * la), 0.0) * special.hyp2f1(0.5, p, 1.5, -x * x)
        y = np.where(small, 0.0, a / np.where(small, 1.0, s))
        up = np.where(np.isinf(s), 0.0, np.exp((1.0 - 2.0 * p) * np.log(s))) / (2.0 * p - 1.0)
        up = up * special.hyp2f1(p, p - 0.5, p + 0.5, -y * y)
        lower = np.where(small, low, full - up)
        upper = np.where(small, full - low, up)
    return lower, upper


def _interval(a, s1, s2, gamma):
    """int_{s1}^{s2} (a^2+s^2)^(-p) ds for 0 <= s1 <= s2 <= inf (zero if empty)."""
    s2 = np.maximum(s1, s2)
    l1, u1 = _radial_pieces(a, s1, gamma)
    l2, u2 = _radial_pieces(a, s2, gamma)
    use_upper = s1 >= a
    with np.errstate(invalid="ignore"):  # the discarded branch may be inf - inf
        return np.where(s2 > s1, np.where(use_upper, u1 - u2, l2 - l1), 0.0)


def _inner(a, lo, hi, params: CuspParams):
    """Integral over z_inner in [lo, hi] of 1_Gamma |z|^(-2-gamma), outer = a > 0."""
    g = params.gamma
    full = a >= 1.0
    with np.errstate(over="ignore", divide="ignore"):
        t1 = np.where(full, np.inf, a ** (1.0 / params.b1))
        t2 = np.where(full, np.inf, a ** params.b2)
    # [0, t1] in log form: t1 underflows for large 1/b1 while the piece keeps its mass
    pw = 2.0 + g
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        la = np.log(a)
        lt1 = la / params.b1
        head = np.exp(lt1 - pw * la) * special.hyp2f1(0.5, 0.5 * pw, 1.5, -np.exp(2.0 * (lt1 - la)))
    total = 0.0
    for s1, s2 in ((np.maximum(lo, 0.0), np.maximum(hi, 0.0)), (np.maximum(-hi, 0.0), np.maximum(-lo, 0.0))):
        near = np.where((s1 == 0) & (s2 >= t1), head, _interval(a, s1, np.minimum(s2, t1), g))
        far = _interval(a, np.maximum(s1, t2), s2, g)
        total = total + np.where(full, _interval(a, s1, s2, g), near + far)
    return total


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _kinks(params: CuspParams, lo, hi):
    ends = [np.abs(np.asarray(lo, float)), np.abs(np.asarray(hi, float))]
    out = [np.ones_like(ends[0])]
    for e in ends:
        with np.errstate(divide="ignore", over="ignore"):
            out.append(np.where(np.isfinite(e), e ** params.b1, np.inf))
            out.append(np.where(np.isfinite(e), e ** (1.0 / params.b2), np.inf))
    return out


def plane_strip_integral(params: CuspParams, a_lo, a_hi, lo, hi) -> np.ndarray:
    """``int_{a_lo}^{a_hi} int_{lo}^{hi} 1_Gamma(a, s) |(a, s)|^(-2-gamma) ds da``.

    Vectorized over equal-shaped arrays; requires ``0 < a_lo <= a_hi < inf``.
    The kernel constant ``C`` is not applied.  Outer integration is
    Gauss-Legendre in ``log a`` on segments split where the boundary of
    Gamma crosses the inner limits, so every segment is smooth.
    """
    a_lo, a_hi, lo, hi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a_lo, a_hi, lo, hi)))
    shape = a_lo.shape
    a_lo, a_hi, lo, hi = (v.reshape(-1) for v in (a_lo, a_hi, lo, hi))
    if np.any(a_lo <= 0) or np.any(a_hi < a_lo):
        raise ValueError("outer range must be positive and ordered")
    pts = [a_lo, a_hi] + [np.clip(k, a_lo, a_hi) for k in _kinks(params, lo, hi)]
    pts = np.sort(np.log(np.stack(pts, axis=1)), axis=1)
    left, right = pts[:, :-1], pts[:, 1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    u = mid[..., None] + half[..., None] * _GL_X
    a = np.exp(u)
    f = _inner(a, lo[:, None, None], hi[:, None, None], params) * a
    val = np.sum(f * _GL_W * half[..., None], axis=(1, 2))
    return val.reshape(shape)


def _plane_tail(params: CuspParams, a0: float, lo: float, hi: float) -> tuple[float, float]:
    """``int_{a0}^inf`` of the strip integrand; returns (value, error bound)."""
    q = 0.5 * (params.gamma + 1.0)
    full_line = special.beta(0.5, q)

    def f(u):
        a = math.exp(u)
        return float(_inner(np.array(a), np.array(lo), np.array(hi), params)) * a

    kinks = sorted({float(k) for k in _kinks(params, lo, hi) if a0 < float(k) < np.inf})
    total, err = 0.0, 0.0
    left = a0
    right = max(4.0 * a0, 2.0 * (kinks[-1] if kinks else a0))
    while True:
        pts = [math.log(k) for k in kinks if left < k < right]
        v, e = integrate.quad(f, math.log(left), math.log(right), points=pts or None, limit=200, epsabs=0.0, epsrel=1e-12)
        total += v
        err += e
        remainder = full_line * right ** (-params.gamma) / params.gamma
        if remainder <= _TAIL_REL * total or total == 0.0 and remainder < 1e-300:
            return total, err + remainder
        left, right = right, right * 8.0


# ---------------------------------------------------------------------------
# measure families


class AxisTerm(NamedTuple):
    axis: int
    alpha: float
    weight: float  # density weight * |h|^(-1-alpha)


class PlaneTerm(NamedTuple):
    axes: tuple
    params: CuspParams  # density params.C * |z|^(-2-gamma) on Gamma


class JumpMeasure:
    """Base class; subclasses define ``exponents``, ``axis_terms`` and ``plane_terms``."""

    exponents: ExponentVector
    coefficient: CoefficientField

    @property
    def axis_terms(self) -> list:
        return []

    @property
    def plane_terms(self) -> list:
        return []

    @property
    def d(self) -> int:
        return self.exponents.d

    def decay_exponents(self) -> list:
        return [t.alpha for t in self.axis_terms] + [p.params.gamma for p in self.plane_terms]


@dataclass(frozen=True)
class Axes(JumpMeasure):
    exponents: ExponentVector
    coefficient: CoefficientField = UNIT

    @property
    def axis_terms(self):
        return [AxisTerm(k, a, 2.0 - a) for k, a in enumerate(self.exponents.alphas)]


@dataclass(frozen=True)
class ProductStable(JumpMeasure):
    alpha: float
    beta: float
    coefficient: CoefficientField = UNIT
    alpha0: float | None = None

    @property
    def exponents(self):
        return ExponentVector((self.alpha, self.alpha, self.beta), self.alpha0)

    @property
    def axis_terms(self):
        return [AxisTerm(2, self.beta, 2.0 - self.beta)]

    @property
    def plane_terms(self):
        self.exponents
        return [PlaneTerm((0, 1), CuspParams.isotropic(self.alpha))]


@dataclass(frozen=True)
class DoubleExponent(JumpMeasure):
    alphas: tuple
    betas: tuple
    coefficient: CoefficientField = UNIT
    alpha0: float | None = None

    def __post_init__(self):
        a = tuple(float(v) for v in self.alphas)
        b = tuple(float(v) for v in self.betas)
        if len(a) != len(b):
            raise ValueError("alphas and betas must have equal length")
        if any(bk > ak for ak, bk in zip(a, b)):
            raise ValueError("DoubleExponent requires beta_k <= alpha_k")
        a0 = self.alpha0 if self.alpha0 is not None else min(a + b)
        ExponentVector(a + b, a0)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "alpha0", a0)

    @property
    def exponents(self):
        return ExponentVector(self.alphas, self.alpha0)

    @property
    def axis_terms(self):
        out = [AxisTerm(k, a, 2.0 - a) for k, a in enumerate(self.alphas)]
        return out + [AxisTerm(k, b, 2.0 - b) for k, b in enumerate(self.betas)]


@dataclass(frozen=True)
class Cusp(JumpMeasure):
    alpha1: float
    alpha2: float
    coefficient: CoefficientField = UNIT
    alpha0: float | None = None

    @property
    def exponents(self):
        return ExponentVector((self.alpha1, self.alpha2), self.alpha0)

    @property
    def params(self) -> CuspParams:
        return cusp_params(self.alpha1, self.alpha2, self.alpha0)

    @property
    def plane_terms(self):
        return [PlaneTerm((0, 1), self.params)]


def make_measure(family: str, **params) -> JumpMeasure:
    """Build a measure from a family name as used in experiment configs."""
    coef = params.pop("coefficient", None)
    if isinstance(coef, str):
        coef = {"unit": UNIT, "stock": CoefficientField.stock()}[coef]
    elif isinstance(coef, (int, float)):
        coef = CoefficientField.constant(float(coef))
    extra = {"coefficient": coef} if coef is not None else {}
    family = family.lower().replace("_", "-")
    if family == "axes":
        return Axes(ExponentVector(tuple(params["alphas"]), params.get("alpha0")), **extra)
    if family == "product-stable":
        return ProductStable(params["alpha"], params["beta"], alpha0=params.get("alpha0"), **extra)
    if family == "double-exponent":
        return DoubleExponent(tuple(params["alphas"]), tuple(params["betas"]), alpha0=params.get("alpha0"), **extra)
    if family == "cusp":
        a1, a2 = params["alphas"] if "alphas" in params else (params["alpha1"], params["alpha2"])
        return Cusp(a1, a2, alpha0=params.get("alpha0"), **extra)
    raise ValueError(f"unknown measure family {family!r}")


# ---------------------------------------------------------------------------
# pointwise density


@dataclass(frozen=True)
class SingularDensity:
    """Density carried by the coordinate subspace through ``x`` spanned by ``axes``.

    ``axes`` is empty when ``y`` is not reachable by a single jump.
    """

    axes: tuple
    value: float


def mu_eval_density(mu: JumpMeasure, t: float, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    h = y - x
    if not np.any(h):
        raise ValueError("density is undefined on the diagonal x = y")
    a = float(mu.coefficient(np.asarray(t, dtype=float), x, y))
    moved = tuple(int(k) for k in np.flatnonzero(h))
    if isinstance(mu, Cusp):
        return a * cusp_kernel(h, mu.params)
    value = 0.0
    for term in mu.axis_terms:
        if moved == (term.axis,):
            value += term.weight * abs(h[term.axis]) ** (-1.0 - term.alpha)
    for term in mu.plane_terms:
        if set(moved) <= set(term.axes):
            z = h[list(term.axes)]
            value += cusp_kernel(z, term.params)
            return SingularDensity(tuple(term.axes), a * value)
    if len(moved) == 1 and value:
        return SingularDensity(moved, a * value)
    return SingularDensity((), 0.0)


# ---------------------------------------------------------------------------
# tails


def mu_axes_tail_exact(ev: ExponentVector, rho: float) -> float:
    if not rho > 0:
        raise ValueError("rho must be positive")
    return 2.0 * math.fsum((2.0 - a) / a for a in ev.alphas) * rho ** (-ev.alpha_max)


@dataclass(frozen=True)
class TailMass:
    mass: float
    error: float
    ratio: float  # mass / ((2 - alpha_k) rho^-alpha_max), summed over k for "all"


def _axis_tail(weight: float, alpha: float, w: float) -> tuple[float, float]:
    """``int_w^inf weight s^(-1-alpha) ds`` by quadrature in log s with a truncation bound."""

    def f(u):
        return weight * math.exp(-alpha * u)

    total, err = 0.0, 0.0
    left, right = w, 8.0 * w
    while True:
        v, e = integrate.quad(f, math.log(left), math.log(right), epsabs=0.0, epsrel=1e-13)
        total += v
        err += e
        remainder = weight * right ** (-alpha) / alpha
        if remainder <= _TAIL_REL * total:
            return total, err + remainder
        left, right = right, right * 2.0 ** (8.0 / alpha)


def _axis_line_outside(term: AxisTerm, left: float, right: float) -> tuple[float, float]:
    """Mass of the axis density outside ``(-left, right)``."""
    v1, e1 = _axis_tail(term.weight, term.alpha, left)
    v2, e2 = _axis_tail(term.weight, term.alpha, right)
    return v1 + v2, e1 + e2


def _plane_outside(params: CuspParams, n1, m1, n2, m2) -> tuple[float, float]:
    """Mass of ``|z|^(-2-gamma) 1_Gamma`` outside ``(-m1, n1) x (-m2, n2)``; inf bounds allowed."""
    total, err = 0.0, 0.0
    for lim in (n1, m1):
        if np.isfinite(lim):
            v, e = _plane_tail(params, lim, -np.inf, np.inf)
            total, err = total + v, err + e
    sw = params.swapped()
    for lim in (n2, m2):
        if np.isfinite(lim):
            v, e = _plane_tail(sw, lim, -m1, n1)
            total, err = total + v, err + e
    return params.C * total, params.C * err


def tail_mass(mu: JumpMeasure, x0, rho: float, k: int | str = "all") -> TailMass:
    """Mass ``mu(x0, R^d minus E_rho^k(x0))``, or of the complement of ``M_rho(x0)`` for ``k='all'``.

    All families are translation invariant, so ``x0`` only fixes the dimension.
    """
    ev = mu.exponents
    if not rho > 0:
        raise ValueError("rho must be positive")
    np.broadcast_to(np.asarray(x0, dtype=float), (ev.d,))
    w = ev.half_widths(rho)
    if k == "all":
        lim = w
        ref = math.fsum(2.0 - a for a in ev.alphas)
    else:
        if not 0 <= int(k) < ev.d:
            raise IndexError(f"axis {k} out of range")
        lim = np.full(ev.d, np.inf)
        lim[int(k)] = w[int(k)]
        ref = 2.0 - ev.alphas[int(k)]
    mass, err = 0.0, 0.0
    for term in mu.axis_terms:
        if np.isfinite(lim[term.axis]):
            v, e = _axis_line_outside(term, lim[term.axis], lim[term.axis])
            mass, err = mass + v, err + e
    for term in mu.plane_terms:
        i, j = term.axes
        if np.isfinite(lim[i]) or np.isfinite(lim[j]):
            v, e = _plane_outside(term.params, lim[i], lim[i], lim[j], lim[j])
            mass, err = mass + v, err + e
    return TailMass(mass, err, mass / (ref * rho ** (-ev.alpha_max)))


def mass_outside_box(mu: JumpMeasure, x, box: AnisoBox) -> float:
    """``mu(x, R^d minus box)`` for ``x`` inside ``box`` (coefficient not applied)."""
    x = np.asarray(x, dtype=float)
    right = box.upper - x
    left = x - box.lower
    if np.any(right <= 0) or np.any(left <= 0):
        raise ValueError("x must lie inside the box")
    total = 0.0
    for term in mu.axis_terms:
        k = term.axis
        total += term.weight / term.alpha * (left[k] ** -term.alpha + right[k] ** -term.alpha)
    for term in mu.plane_terms:
        i, j = term.axes
        total += _plane_outside(term.params, right[i], left[i], right[j], left[j])[0]
    return total


# ---------------------------------------------------------------------------
# moment condition


@dataclass(frozen=True)
class MomentResult:
    satisfied: bool
    supremum: float
    divergent: bool
    argmax: tuple


def _axis_moment(term: AxisTerm, x: np.ndarray, wall: float, power: float) -> float:
    """int over |x_k + s| >= wall of |y|^power weight |s|^(-1-alpha) ds."""
    k = term.axis
    c2 = float(x @ x - x[k] ** 2)
    xk = float(x[k])
    total = 0.0
    for sign in (1.0, -1.0):
        start = wall - sign * xk  # distance along the ray to the wall
        def f(u, sign=sign):
            s = math.exp(u)
            v = xk + sign * s
            return term.weight * (c2 + v * v) ** (0.5 * power) * s ** (-term.alpha)
        right = 8.0 * start
        left = start
        part = 0.0
        while True:
            v, _ = integrate.quad(f, math.log(left), math.log(right), epsabs=0.0, epsrel=1e-10, limit=200)
            part += v
            bound = term.weight * 2.0 ** power * right ** (power - term.alpha) / (term.alpha - power)
            if bound <= _TAIL_REL * part or right > 1e200:
                break
            left, right = right, right * 16.0
        total += part
    return total


def _plane_moment(term: PlaneTerm, x: np.ndarray, wall: np.ndarray, power: float) -> float:
    i, j = term.axes
    p = term.params
    xi, xj = float(x[i]), float(x[j])
    rest = float(x @ x - xi * xi - xj * xj)
    wi, wj = float(wall[i]), float(wall[j])

    def exit_radius(th):
        c, s = math.cos(th), math.sin(th)
        cand = []
        if c > 0:
            cand.append((wi - xi) / c)
        elif c < 0:
            cand.append((-wi - xi) / c)
        if s > 0:
            cand.append((wj - xj) / s)
        elif s < 0:
            cand.append((-wj - xj) / s)
        return min(cand)

    def radial(th):
        c, s = math.cos(th), math.sin(th)
        r0 = exit_radius(th)

        def f(u):
            r = math.exp(u)
            yi, yj = xi + r * c, xj + r * s
            return (rest + yi * yi + yj * yj) ** (0.5 * power) * r ** (-p.gamma)

        part, left, right = 0.0, r0, 8.0 * r0
        while True:
            v, _ = integrate.quad(f, math.log(left), math.log(right), epsabs=0.0, epsrel=1e-10)
            part += v
            reach = math.sqrt(rest) + abs(xi) + abs(xj)
            bound = (reach + right) ** power * right ** (-p.gamma) * 2.0 ** power / (p.gamma - power)
            if bound <= _TAIL_REL * part or right > 1e200:
                return part
            left, right = right, right * 16.0

    corners = sorted(math.atan2(sj * wj - xj, si * wi - xi) % (2 * math.pi) for si in (-1, 1) for sj in (-1, 1))
    edges = [0.0] + corners + [2 * math.pi]
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            total += integrate.quad(radial, a, b, epsabs=0.0, epsrel=1e-8, limit=100)[0]
    return p.C * total


def moment_condition(mu: JumpMeasure, Lambda: float, points_per_axis: int = 5) -> MomentResult:
    """Check ``sup_{x in M_2} int_{outside M_3} |y|^(1/Lambda) mu(x, dy) <= Lambda``."""
    if Lambda < 1:
        raise ValueError("Lambda must be at least 1")
    ev = mu.exponents
    power = 1.0 / Lambda
    if any(e <= power for e in mu.decay_exponents()):
        return MomentResult(False, math.inf, True, ())
    inner = aniso_box(np.zeros(ev.d), 2.0, ev)
    wall = ev.half_widths(3.0)
    n = points_per_axis
    axes_pts = [inner.lower[k] + (np.arange(n) + 0.5) * 2 * inner.half_widths[k] / n for k in range(ev.d)]
    best, arg = -math.inf, ()
    for x in (np.array(p) for p in np.stack(np.meshgrid(*axes_pts, indexing="ij"), -1).reshape(-1, ev.d)):
        val = sum(_axis_moment(t, x, wall[t.axis], power) for t in mu.axis_terms)
        val += sum(_plane_moment(t, x, wall, power) for t in mu.plane_terms)
        if val > best:
            best, arg = val, tuple(float(v) for v in x)
    return MomentResult(best <= Lambda, best, False, arg)
