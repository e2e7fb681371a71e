"""Discrete energy forms on cell-centred grids.

A grid function is piecewise constant on cells.  The point ``x`` is collocated
at cell centres while ``y`` is integrated exactly over each cell, so the pair
weight for an offset ``Delta`` is

    W(Delta) = vol(cell) * int_{cell Delta} density(z) dz.

For axis densities the cell integral has the closed form
``(w/alpha) (a^-alpha - b^-alpha)``; for planar densities it is the
semi-analytic strip integral of :mod:`anisoreg.kernels`.  With ``W`` in hand
every form is evaluated through

    sum_{x != y} W(x - y) s_x s_y (u_x - u_y)(v_x - v_y)
        = 2 [ sum u v s (W*s) - sum u s W*(s v) ],

which costs one convolution per term.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, signal

from ..geometry import AnisoBox, ExponentVector
from ..kernels import Axes, CuspParams, JumpMeasure, _plane_outside, plane_strip_integral
from .grid import GridFunction

__all__ = [
    "DiscreteForm",
    "assemble",
    "axis_cell_weights",
    "plane_cell_weights",
    "restrict",
    "energy_axes",
    "energy_general",
    "bilinear",
    "ComparabilityResult",
    "comparability_ratio",
    "random_test_functions",
]

_PERIODIC_IMAGES = 4096


def _segment_mass(lo, hi, alpha, weight, scheme):
    """``int_lo^hi weight s^(-1-alpha) ds`` (cell) or its second moment ``int s^2 ...`` (moment)."""
    if scheme == "cell":
        with np.errstate(divide="ignore"):
            return weight / alpha * (lo ** -alpha - hi ** -alpha)
    e = 2.0 - alpha
    return weight / e * (hi ** e - lo ** e)


def axis_cell_weights(n: int, h: float, alpha: float, weight: float, vol: float, scheme: str = "cell") -> np.ndarray:
    """Pair weights for offsets ``0..n-1`` along one axis (entry 0 is zero).

    ``cell`` integrates the density exactly over each cell and drops the
    same-cell pairs.  ``moment`` assigns each offset the second moment of the
    density over its cell divided by the squared offset, and lumps the
    same-cell second moment onto the nearest neighbours; it is exact for
    locally linear functions, which keeps it consistent as ``alpha -> 2``.
    """
    i = np.arange(1, n, dtype=float)
    w = np.zeros(n)
    if scheme == "cell":
        w[1:] = vol * _segment_mass((i - 0.5) * h, (i + 0.5) * h, alpha, weight, scheme)
    elif scheme == "moment":
        lo = np.where(i == 1, 0.0, (i - 0.5) * h)
        w[1:] = vol * _segment_mass(lo, (i + 0.5) * h, alpha, weight, scheme) / (i * h) ** 2
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return w


def _periodic_axis_weights(n: int, h: float, alpha: float, weight: float, vol: float, scheme: str = "cell") -> np.ndarray:
    """Circulant weights: sum over all images ``j + m n`` of the per-offset weights."""
    j = np.arange(n, dtype=float)[:, None]
    m = np.arange(-_PERIODIC_IMAGES, _PERIODIC_IMAGES + 1, dtype=float)[None, :]
    i = np.abs(j + m * n)
    safe = np.where(i > 0, i, 1.0)
    lo = (safe - 0.5) * h
    if scheme == "moment":
        lo = np.where(safe == 1, 0.0, lo)
    cells = _segment_mass(lo, (safe + 0.5) * h, alpha, weight, scheme)
    if scheme == "moment":
        cells = cells / (safe * h) ** 2
    cells = np.where(i > 0, cells, 0.0)
    # beyond the last image each side contributes 1/n of the remaining line mass
    edge = (_PERIODIC_IMAGES * n + 0.5) * h
    tail = 2.0 * weight / alpha * edge ** -alpha / n
    w = vol * (cells.sum(axis=1) + tail)
    w[0] = 0.0
    return w


@lru_cache(maxsize=64)
def _plane_weights_cached(params: CuspParams, n1: int, n2: int, h1: float, h2: float) -> np.ndarray:
    out = np.zeros((n1, n2))
    if n1 > 1:
        i, j = np.meshgrid(np.arange(1, n1), np.arange(n2), indexing="ij")
        out[1:, :] = plane_strip_integral(
            params, (i - 0.5) * h1, (i + 0.5) * h1, np.where(j == 0, -0.5, j - 0.5) * h2, (j + 0.5) * h2
        )
    if n2 > 1:
        j = np.arange(1, n2)
        out[0, 1:] = plane_strip_integral(params.swapped(), (j - 0.5) * h2, (j + 0.5) * h2, -0.5 * h1, 0.5 * h1)
    out.setflags(write=False)
    return out


def plane_cell_weights(params: CuspParams, n1: int, n2: int, h1: float, h2: float, vol: float) -> np.ndarray:
    """Pair weights for non-negative offsets ``(i, j)``; the kernel is even in each sign."""
    return vol * params.C * _plane_weights_cached(params, int(n1), int(n2), float(h1), float(h2))


def _mirror(w: np.ndarray) -> np.ndarray:
    """Extend weights on non-negative offsets to the full symmetric stencil."""
    for ax in range(w.ndim):
        rev = np.flip(np.take(w, np.arange(1, w.shape[ax]), axis=ax), axis=ax)
        w = np.concatenate([rev, w], axis=ax)
    return w


@dataclass
class _AxisTerm:
    axis: int
    matrix: np.ndarray  # symmetric n x n pair weights, zero diagonal


@dataclass
class _PlaneTerm:
    axes: tuple
    stencil: np.ndarray  # (2 n_i - 1) x (2 n_j - 1)


@dataclass
class DiscreteForm:
    """Pair-weight representation of a jump measure on one grid."""

    shape: tuple
    spacing: np.ndarray
    axis_terms: list = field(default_factory=list)
    plane_terms: list = field(default_factory=list)
    tail: np.ndarray | None = None
    scale: float = 1.0

    def _conv(self, f: np.ndarray, term) -> np.ndarray:
        if isinstance(term, _AxisTerm):
            return np.moveaxis(np.tensordot(term.matrix, f, axes=([1], [term.axis])), 0, term.axis)
        i, j = term.axes
        shape = [1] * f.ndim
        shape[i], shape[j] = term.stencil.shape
        return signal.fftconvolve(f, term.stencil.reshape(shape), mode="same", axes=(i, j))

    def _terms(self):
        return list(self.axis_terms) + list(self.plane_terms)

    def form(self, u, v=None, s=None) -> float:
        u = np.asarray(u, dtype=float)
        v = u if v is None else np.asarray(v, dtype=float)
        if u.shape != tuple(self.shape) or v.shape != tuple(self.shape):
            raise ValueError(f"grid shape mismatch: {u.shape}, {v.shape} vs {tuple(self.shape)}")
        if s is None and self.tail is None:
            # constants are in the kernel, so shifting reduces cancellation
            u = u - u.flat[0]
            v = v - v.flat[0]
        weight = np.ones(self.shape) if s is None else np.asarray(s, dtype=float)
        total = 0.0
        for term in self._terms():
            ks = self._conv(weight, term)
            ksv = self._conv(weight * v, term)
            total += 2.0 * (np.sum(u * v * weight * ks) - np.sum(u * weight * ksv))
        if self.tail is not None:
            total += 2.0 * np.sum(u * v * self.tail * weight * weight)
        return self.scale * float(total)

    def apply(self, u) -> np.ndarray:
        """Return ``K u`` with ``form(u, v) = sum(v * K u)``."""
        u = np.asarray(u, dtype=float)
        out = np.zeros(self.shape)
        ones = np.ones(self.shape)
        for term in self._terms():
            out += 2.0 * (u * self._conv(ones, term) - self._conv(u, term))
        if self.tail is not None:
            out += 2.0 * self.tail * u
        return self.scale * out

    def dense(self) -> np.ndarray:
        """Dense matrix of :meth:`apply` on flattened (C-order) grids; small grids only."""
        n = int(np.prod(self.shape))
        eye = np.eye(n)
        return np.stack([self.apply(eye[k].reshape(self.shape)).ravel() for k in range(n)], axis=1)


def assemble(
    mu: JumpMeasure, shape, spacing, extension: str | None = None, t: float = 0.0, scheme: str = "cell"
) -> DiscreteForm:
    """Pair weights of ``mu`` on a grid.

    ``extension`` selects the outer domain: ``None`` restricts both points to
    the grid (the form on the box), ``"zero"`` adds the exterior pairs of a
    function extended by zero, and ``"periodic"`` treats the grid as one
    period cell of a periodic function.  ``scheme`` picks the axis weights
    (see :func:`axis_cell_weights`); planar kernels always use exact cell
    integrals.
    """
    shape = tuple(int(n) for n in shape)
    spacing = np.asarray(spacing, dtype=float)
    vol = float(np.prod(spacing))
    if mu.coefficient.spatial:
        raise NotImplementedError("space-dependent coefficients are evaluated by energy_varying")
    form = DiscreteForm(shape, spacing, scale=mu.coefficient.scalar(t))
    for term in mu.axis_terms:
        k = term.axis
        n, h = shape[k], spacing[k]
        if extension == "periodic":
            w = _periodic_axis_weights(n, h, term.alpha, term.weight, vol, scheme)
            idx = np.arange(n)
            mat = w[(idx[None, :] - idx[:, None]) % n]
        else:
            mat = linalg.toeplitz(axis_cell_weights(n, h, term.alpha, term.weight, vol, scheme))
        form.axis_terms.append(_AxisTerm(k, mat))
    for term in mu.plane_terms:
        if extension == "periodic":
            raise NotImplementedError("periodic planar kernels are not supported")
        i, j = term.axes
        w = plane_cell_weights(term.params, shape[i], shape[j], spacing[i], spacing[j], vol)
        form.plane_terms.append(_PlaneTerm((i, j), _mirror(np.asarray(w))))
    if extension == "zero":
        if scheme != "cell":
            raise NotImplementedError("zero extension uses the cell scheme")
        form.tail = _zero_tail(mu, form, shape, spacing, vol)
    elif extension not in (None, "periodic"):
        raise ValueError(f"unknown extension {extension!r}")
    return form


def _zero_tail(mu, form: DiscreteForm, shape, spacing, vol) -> np.ndarray:
    """Per-cell weight of pairs ``(x, y)`` with ``y`` outside the grid box."""
    tail = np.zeros(shape)
    for term in mu.axis_terms:
        k, n, h = term.axis, shape[k], spacing[k]
        i = np.arange(n, dtype=float)
        line = term.weight / term.alpha * (((i + 0.5) * h) ** -term.alpha + ((n - i - 0.5) * h) ** -term.alpha)
        bshape = [1] * len(shape)
        bshape[k] = n
        tail = tail + vol * line.reshape(bshape)
    ones = np.ones(shape)
    for pt, term in zip(form.plane_terms, mu.plane_terms):
        i, j = term.axes
        hi, hj = spacing[i] / 2, spacing[j] / 2
        outside_cell = _plane_outside(term.params, hi, hi, hj, hj)[0]
        tail = tail + vol * outside_cell - form._conv(ones, pt)
    return tail


# ---------------------------------------------------------------------------
# user-facing energies


def restrict(u: GridFunction, omega: AnisoBox | None):
    """Values of ``u`` on the cells whose centres lie in ``omega``."""
    if omega is None or omega == u.box:
        return u.values
    c = u.centers()
    sl = []
    for k in range(u.box.d):
        axis_c = np.moveaxis(c[..., k], k, 0).reshape(c.shape[k], -1)[:, 0]
        keep = np.flatnonzero(np.abs(axis_c - omega.center[k]) < omega.half_widths[k])
        if keep.size < 2:
            raise ValueError("omega covers fewer than two cells along an axis")
        sl.append(slice(keep[0], keep[-1] + 1))
    return u.values[tuple(sl)]


def bilinear(u: GridFunction, v: GridFunction | None, omega: AnisoBox | None, mu: JumpMeasure, t: float = 0.0) -> float:
    if v is not None and (v.box != u.box or v.resolution != u.resolution):
        raise ValueError("mismatched grids")
    uu = restrict(u, omega)
    vv = None if v is None else restrict(v, omega)
    return assemble(mu, uu.shape, u.spacing, t=t).form(uu, vv)


def energy_axes(u: GridFunction, omega: AnisoBox | None, ev: ExponentVector) -> float:
    """``E^{mu_axes}_omega(u, u)``."""
    if ev.d != u.box.d:
        raise ValueError("mismatched grids")
    return bilinear(u, None, omega, Axes(ev))


def energy_general(u: GridFunction, omega: AnisoBox | None, mu: JumpMeasure, t: float = 0.0) -> float:
    if mu.d != u.box.d:
        raise ValueError("mismatched grids")
    return bilinear(u, None, omega, mu, t)


# ---------------------------------------------------------------------------
# comparability


def random_test_functions(box: AnisoBox, count: int, seed: int = 0) -> list:
    """Fixed random functions on ``box``: half smooth Fourier sums, half piecewise constant.

    They are returned as closures of physical position so the same function can
    be sampled at several resolutions.
    """
    rng = np.random.default_rng(seed)
    d = box.d
    out = []
    for n in range(count):
        if n % 2 == 0:
            modes = rng.integers(-6, 7, size=(12, d))
            amp = rng.normal(size=12) / (1.0 + np.linalg.norm(modes, axis=1)) ** 1.5
            phase = rng.uniform(0, 2 * np.pi, 12)

            def f(x, modes=modes, amp=amp, phase=phase):
                z = (x - box.center) / box.half_widths
                return np.cos(np.pi / 2 * z @ modes.T + phase) @ amp
        else:
            cuts = [np.sort(rng.uniform(-1, 1, rng.integers(1, 6))) for _ in range(d)]
            vals = rng.normal(size=tuple(len(c) + 1 for c in cuts))

            def f(x, cuts=cuts, vals=vals):
                z = (x - box.center) / box.half_widths
                idx = tuple(np.searchsorted(c, z[..., k]) for k, c in enumerate(cuts))
                return vals[idx]
        out.append(f)
    return out


@dataclass(frozen=True)
class ComparabilityResult:
    min_ratio: float
    max_ratio: float
    ratios: tuple
    skipped: int


def comparability_ratio(
    mu: JumpMeasure, omega: AnisoBox, sample_count: int, resolution=64, seed: int = 0, t: float = 0.0
) -> ComparabilityResult:
    """Extremal ``E^mu / E^axes`` over fixed random functions on ``omega``."""
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    if mu.d != omega.d:
        raise ValueError("dimension mismatch")
    res = (int(resolution),) * omega.d if np.ndim(resolution) == 0 else tuple(resolution)
    spacing = 2.0 * omega.half_widths / np.asarray(res)
    fm = assemble(mu, res, spacing, t=t)
    fa = assemble(Axes(mu.exponents), res, spacing)
    ratios, skipped = [], 0
    for f in random_test_functions(omega, sample_count, seed):
        u = GridFunction.from_function(omega, res, f).values
        ea = fa.form(u)
        if not ea > 0:
            skipped += 1
            continue
        ratios.append(fm.form(u) / ea)
    if not ratios:
        raise ValueError("every sample had zero axes energy")
    return ComparabilityResult(min(ratios), max(ratios), tuple(ratios), skipped)
