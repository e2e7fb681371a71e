"""Lipschitz cut-off functions adapted to anisotropic boxes.

``tau = min_k ramp_k(x_k)`` where ``ramp_k`` equals one on the inner box
``M_r(x0)``, vanishes outside ``M_{lambda r}(x0)`` and is linear between.
The energy density ``int (tau(x) - tau(y))^2 mu(x, dy)`` is integrated
exactly along axis terms (the integrand is piecewise quadratic in the jump
length) and by Gauss quadrature in logarithmic variables on plane terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .energy.grid import GridFunction
from .geometry import AnisoBox, ExponentVector, aniso_box
from .kernels import CuspParams, JumpMeasure, _inner, mass_outside_box

__all__ = [
    "CutoffFunction",
    "build_cutoff",
    "CutoffEnergyResult",
    "cutoff_energy_bound",
    "cutoff_energy_density",
    "cutoff_weighted_l2_bound",
    "cutoff_scale",
]


@dataclass(frozen=True)
class CutoffFunction:
    x0: np.ndarray
    r: float
    lam: float
    exponents: ExponentVector
    c: float = 1.0

    @property
    def d(self) -> int:
        return self.exponents.d

    @property
    def inner(self) -> np.ndarray:
        return self.exponents.half_widths(self.r)

    @property
    def outer(self) -> np.ndarray:
        return self.exponents.half_widths(self.lam * self.r)

    @property
    def slopes(self) -> np.ndarray:
        """Exact per-coordinate Lipschitz constants of the ramps."""
        return 1.0 / (self.outer - self.inner)

    def slope_bounds(self) -> np.ndarray:
        """``c (lambda^(a_max/a_k) - 1)^(-1) r^(-a_max/a_k)``."""
        p = self.exponents.powers
        return self.c / ((self.lam**p - 1.0) * self.r**p)

    @property
    def support(self) -> AnisoBox:
        return aniso_box(self.x0, self.lam * self.r, self.exponents)

    def breakpoints(self, k: int) -> np.ndarray:
        w, W = self.inner[k], self.outer[k]
        return self.x0[k] + np.array([-W, -w, w, W])

    def ramps(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        dist = np.abs(x - self.x0)
        return np.clip((self.outer - dist) * self.slopes, 0.0, 1.0)

    def __call__(self, x) -> np.ndarray:
        return np.min(self.ramps(x), axis=-1)


def build_cutoff(x0, r: float, lam: float, ev: ExponentVector) -> CutoffFunction:
    if not 0.0 < r <= 1.0:
        raise ValueError(f"r must lie in (0, 1], got {r}")
    if not 1.0 < lam <= 2.0:
        raise ValueError(f"lambda must lie in (1, 2], got {lam}")
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (ev.d,)).copy()
    return CutoffFunction(x0, float(r), float(lam), ev, 1.0)


def cutoff_scale(tau: CutoffFunction) -> float:
    """``r^(-a_max) sum_k (lambda^(a_max/a_k) - 1)^(-a_k)``."""
    ev = tau.exponents
    return tau.r ** (-ev.alpha_max) * math.fsum((tau.lam**p - 1.0) ** (-a) for p, a in zip(ev.powers, ev.alphas))


# ---------------------------------------------------------------------------
# axis terms: exact


def _power_integral(j: int, alpha: float, a: float, b: float) -> float:
    """``int_a^b h^(j - 1 - alpha) dh`` for ``0 <= a < b <= inf``."""
    e = j - alpha
    if a == 0.0:
        if e <= 0:
            raise ValueError("divergent integral at zero")
        return b**e / e
    if math.isinf(b):
        if e >= 0:
            raise ValueError("divergent integral at infinity")
        return -(a**e) / e
    if e == 0.0:
        return math.log(b / a)
    return a**e * math.expm1(e * math.log(b / a)) / e


def _axis_density(tau: CutoffFunction, x: np.ndarray, k: int, alpha: float, weight: float) -> float:
    """``int (tau(x) - tau(x + h e_k))^2 weight |h|^(-1-alpha) dh``, exactly."""
    ramps = tau.ramps(x)
    m = float(np.min(np.delete(ramps, k))) if tau.d > 1 else 1.0
    if m == 0.0:
        return 0.0
    w, W, s = tau.inner[k], tau.outer[k], tau.slopes[k]
    c0 = tau.x0[k]
    level = W - m / s
    ys = np.array([c0 - W, c0 - w, c0 + w, c0 + W, c0 - level, c0 + level])
    hs = ys - x[k]

    def g(h):
        dist = abs(x[k] + h - c0)
        return min(min(max((W - dist) * s, 0.0), 1.0), m)

    g0 = g(0.0)
    total = 0.0
    for sign in (1.0, -1.0):
        knots = sorted({float(v) for v in sign * hs if v > 0.0})
        delta = lambda t: g0 - g(sign * t)  # noqa: E731
        left = 0.0
        for right in knots:
            d_l, d_r = delta(left), delta(right)
            c1 = (d_r - d_l) / (right - left)
            if left == 0.0:
                total += c1 * c1 * _power_integral(2, alpha, 0.0, right)
            else:
                c = d_l - c1 * left
                total += (
                    c * c * _power_integral(0, alpha, left, right)
                    + 2.0 * c * c1 * _power_integral(1, alpha, left, right)
                    + c1 * c1 * _power_integral(2, alpha, left, right)
                )
            left = right
        tail = delta(left + 1.0) if left > 0.0 else 0.0
        if tail:
            total += tail * tail * _power_integral(0, alpha, left, math.inf)
    return weight * total


# ---------------------------------------------------------------------------
# plane terms: quadrature

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_INNER_PIECES = 4


def _gl_nodes(lo, hi, pieces: int):
    """Composite Gauss-Legendre nodes on ``[lo, hi]`` (arrays broadcast over leading axes)."""
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    edges = lo + (hi - lo) * np.linspace(0.0, 1.0, pieces + 1)
    a, b = edges[..., :-1, None], edges[..., 1:, None]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b) + half * _GL_X
    weights = half * _GL_W
    shape = nodes.shape[:-2] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def _plane_inner(tau: CutoffFunction, x, axes, params: CuspParams, a: np.ndarray) -> np.ndarray:
    """``G(a) = sum_sigma int_{|s|<=a} f(sigma a, s) 1_Gamma |(a, s)|^(-2-gamma) ds``."""
    i, j = axes
    p = 0.5 * (2.0 + params.gamma)
    full = a >= 1.0
    with np.errstate(over="ignore", divide="ignore"):
        t1 = np.where(full, a, np.minimum(a, a ** (1.0 / params.b1)))
        t2 = np.where(full, a, np.minimum(a, a**params.b2))
    s1, w1 = _gl_nodes(np.zeros_like(a), t1, _INNER_PIECES)
    s2, w2 = _gl_nodes(t2, a, _INNER_PIECES)
    s = np.concatenate([s1, s2], axis=-1)
    w = np.concatenate([w1, w2], axis=-1)
    kern = (a[:, None] ** 2 + s**2) ** (-p)
    tx = float(tau(x))
    total = np.zeros_like(a)
    for sigma in (1.0, -1.0):
        for sgn in (1.0, -1.0):
            y = np.broadcast_to(x, s.shape + (tau.d,)).copy()
            y[..., i] += sigma * a[:, None]
            y[..., j] += sgn * s
            f = (tx - tau(y)) ** 2
            total += np.sum(f * kern * w, axis=-1)
    return total


def _plane_density(tau: CutoffFunction, x: np.ndarray, axes, params: CuspParams, rtol: float = 1e-10) -> float:
    """Cut-off energy density of ``C |z|^(-2-gamma) 1_Gamma`` on the plane ``axes``."""
    total = 0.0
    for outer, inner, prm in ((axes[0], axes[1], params), (axes[1], axes[0], params.swapped())):
        d_out = np.abs(tau.breakpoints(outer) - x[outer])
        d_in = np.abs(tau.breakpoints(inner) - x[inner])
        kinks = [1.0]
        kinks += [float(v) for v in d_out if v > 0]
        kinks += [float(v) for v in d_in if v > 0]
        kinks += [float(v) ** prm.b1 for v in d_in if v > 0]
        kinks = sorted(set(kinks))
        far = max(float(d_out.max()), float(d_in.max()), 1.0) * 1.0001
        a_lo = min(kinks) * 1e-6
        # log-spaced segments of length <= 0.5 between the kinks
        edges = [math.log(a_lo)]
        for k in kinks + [far]:
            lk = math.log(k)
            if lk <= edges[-1]:
                continue
            n = max(1, math.ceil((lk - edges[-1]) / 0.5))
            edges += list(np.linspace(edges[-1], lk, n + 1)[1:])
        e = np.asarray(edges)
        half = 0.5 * np.diff(e)[:, None]
        u = 0.5 * (e[1:] + e[:-1])[:, None] + half * _GL_X
        a = np.exp(u).ravel()
        g = _plane_inner(tau, x, (outer, inner), prm, a)
        value = float(np.sum(g * a * (half * _GL_W).ravel()))
        # below a_lo the integrand follows a power law; extrapolate it
        g_lo = _plane_inner(tau, x, (outer, inner), prm, np.array([a_lo, 0.5 * a_lo]))
        if g_lo[0] > 0 and g_lo[1] > 0:
            slope = math.log(g_lo[0] / g_lo[1]) / math.log(2.0)
            value += g_lo[0] * a_lo / (1.0 + slope)
        # beyond `far` the jump leaves the support: f = tau(x)^2
        tx2 = float(tau(x)) ** 2
        if tx2 > 0:
            value += tx2 * _far_strip(prm, far, rtol * max(value, 1e-300))
        total += value
    return params.C * total


def _far_strip(params: CuspParams, a0: float, atol: float) -> float:
    """``int_{a0}^inf 2 int_{|s|<=a} 1_Gamma |(a, s)|^(-2-gamma) ds da``."""
    full_line = special.beta(0.5, 0.5 * (params.gamma + 1.0))
    total = 0.0
    left = math.log(a0)
    while True:
        right = left + 4.0
        pts = np.linspace(left, right, 9)
        half = 0.5 * np.diff(pts)[:, None]
        u = 0.5 * (pts[1:] + pts[:-1])[:, None] + half * _GL_X
        a = np.exp(u).ravel()
        g = 2.0 * _inner(a, -a, a, params)
        total += float(np.sum(g * a * (half * _GL_W).ravel()))
        remainder = 2.0 * full_line * math.exp(right) ** (-params.gamma) / params.gamma
        if remainder < atol or remainder < 1e-12 * total:
            return total
        left = right


# ---------------------------------------------------------------------------
# public checks


def cutoff_energy_density(tau: CutoffFunction, mu: JumpMeasure, x, t: float = 0.0) -> float:
    """``int (tau(x) - tau(y))^2 mu(x, dy)`` at a single point."""
    x = np.asarray(x, dtype=float)
    if x.shape != (tau.d,) or mu.d != tau.d:
        raise ValueError("dimension mismatch")
    total = 0.0
    for term in mu.axis_terms:
        total += _axis_density(tau, x, term.axis, term.alpha, term.weight)
    for term in mu.plane_terms:
        total += _plane_density(tau, x, term.axes, term.params)
    if not math.isfinite(total):
        raise ArithmeticError(f"cut-off energy quadrature failed at x = {x}")
    return mu.coefficient.scalar(t) * total


@dataclass(frozen=True)
class CutoffEnergyResult:
    supremum: float
    argmax: np.ndarray
    bound_scale: float
    c1: float
    points: int


def _scan_axes(tau: CutoffFunction, k: int, points: int) -> np.ndarray:
    """Nonnegative half of a symmetric grid over the support, plus the breakpoints."""
    W = tau.outer[k]
    grid = np.linspace(-W, W, points)
    vals = np.concatenate([grid, tau.breakpoints(k) - tau.x0[k]])
    vals = np.unique(np.abs(vals))
    return tau.x0[k] + vals


def cutoff_energy_bound(
    tau: CutoffFunction, mu: JumpMeasure, points: int = 33, t: float = 0.0
) -> CutoffEnergyResult:
    """Supremum of the cut-off energy density and the empirical constant ``c_1``.

    The scan uses ``points`` nodes per axis across ``M_{lambda r}(x0)`` together
    with the ramp breakpoints.  The cut-off and every supported measure are
    symmetric under reflections through ``x0``, so only one orthant is scanned.
    """
    if mu.d != tau.d:
        raise ValueError("dimension mismatch")
    axes = [_scan_axes(tau, k, points) for k in range(tau.d)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, tau.d)
    best, arg = -1.0, grid[0]
    for x in grid:
        v = cutoff_energy_density(tau, mu, x, t)
        if v > best:
            best, arg = v, x
    scale = cutoff_scale(tau)
    return CutoffEnergyResult(best, arg, scale, best / scale, len(grid))


def cutoff_weighted_l2_bound(tau: CutoffFunction, mu: JumpMeasure, u: GridFunction, t: float = 0.0) -> float:
    """``int u^2 tau^2 mu(x, R^d minus M_{lambda r}) dx`` over the bound's right side.

    The right side is ``r^(-a_max) sum_k (lambda^(a_max/a_k) - 1)^(-a_k) ||u||_2^2``;
    the returned ratio is therefore an empirical ``c_1``.  ``u`` lives on a
    grid of the support box; the outer integral uses cell centres.
    """
    box = tau.support
    if not (np.allclose(u.box.center, box.center) and math.isclose(u.box.radius, box.radius)):
        raise ValueError("u must be given on the support box of tau")
    norm2 = u.norm(2.0) ** 2
    if norm2 == 0.0:
        return 0.0
    pts = u.centers().reshape(-1, tau.d)
    tau2 = tau(pts) ** 2
    mass = np.array([mass_outside_box(mu, x, box) if w > 0 else 0.0 for x, w in zip(pts, tau2)])
    left = float(np.sum(u.values.reshape(-1) ** 2 * tau2 * mass)) * u.cell_volume
    return mu.coefficient.scalar(t) * left / (cutoff_scale(tau) * norm2)
