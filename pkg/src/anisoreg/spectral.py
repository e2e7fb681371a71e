"""Periodic multiplier semigroup solver.

Fields live on the torus ``prod_k [-P_k/2, P_k/2)`` and are stored as the
coefficients ``c_m`` of ``u(x) = sum_m c_m exp(i xi_m . (x + P/2))`` on the
lattice ``xi_m = (2 pi / P) m``, ``|m_k| <= K``.  The generator acts by the
multiplier ``-m(xi)`` with ``m(xi) = sum_k c_k |xi_k|^alpha_k``, so the
semigroup is diagonal and exact in the truncated mode space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import fft, integrate

from .energy.grid import GridFunction, cell_centers
from .geometry import AnisoBox, ExponentVector

__all__ = [
    "SpectralField",
    "stable_constant",
    "axes_multiplier",
    "apply_operator",
    "evolve",
    "evolve_forced",
    "sample_to_grid",
    "positivity_floor",
    "phi1",
]


@lru_cache(maxsize=None)
def stable_constant(alpha: float) -> float:
    """``(2 - alpha) int_R (1 - cos s) |s|^(-1-alpha) ds`` by adaptive quadrature."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    # integrate by parts: int_0^inf (1 - cos s) s^(-1-a) ds = (1/a) int_0^inf sin(s) s^(-a) ds
    head = integrate.quad(
        lambda s: math.sin(s) / s if s > 0 else 1.0,
        0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0), epsabs=0.0, epsrel=1e-13,
    )[0]
    tail = integrate.quad(lambda s: s ** -alpha, 1.0, np.inf, weight="sin", wvar=1.0)[0]
    return 2.0 * (2.0 - alpha) * (head + tail) / alpha


def axes_multiplier(ev: ExponentVector) -> np.ndarray:
    """Multiplier coefficients matching the axes measure.

    With ``E(u, v) = -<Lu, v>`` and the form summed over ordered pairs, the
    symbol of ``-L`` along axis k is ``2 c(alpha_k) |xi_k|^alpha_k``.
    """
    return np.array([2.0 * stable_constant(a) for a in ev.alphas])


def phi1(z) -> np.ndarray:
    """``(e^z - 1)/z`` with ``phi1(0) = 1``."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-8
    safe = np.where(small, 1.0, z)
    return np.where(small, 1.0 + 0.5 * z, np.expm1(safe) / safe)


@dataclass(frozen=True)
class SpectralField:
    period: np.ndarray
    modes: np.ndarray
    exponents: ExponentVector
    coefficients: np.ndarray

    def __post_init__(self):
        d = self.exponents.d
        period = np.broadcast_to(np.asarray(self.period, dtype=float), (d,)).copy()
        coefs = np.broadcast_to(np.asarray(self.coefficients, dtype=float), (d,)).copy()
        modes = np.asarray(self.modes, dtype=complex)
        if modes.ndim != d:
            raise ValueError("mode tensor dimension does not match the exponents")
        if np.any(period <= 0) or np.any(coefs <= 0):
            raise ValueError("periods and multiplier coefficients must be positive")
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "coefficients", coefs)
        object.__setattr__(self, "modes", modes)

    # -- construction -----------------------------------------------------

    @classmethod
    def from_values(cls, values, period, ev: ExponentVector, coefficients=None) -> "SpectralField":
        """Interpolate samples at ``-P/2 + j P/M``."""
        v = np.asarray(values, dtype=float)
        c = axes_multiplier(ev) if coefficients is None else coefficients
        return cls(period, fft.fftn(v) / v.size, ev, c)

    @classmethod
    def from_function(cls, f: Callable, period, K: int, ev: ExponentVector, coefficients=None) -> "SpectralField":
        period = np.broadcast_to(np.asarray(period, dtype=float), (ev.d,))
        axes = [-p / 2 + np.arange(2 * K) * p / (2 * K) for p in period]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
        return cls.from_values(f(pts), period, ev, coefficients)

    @property
    def d(self) -> int:
        return self.exponents.d

    @property
    def shape(self) -> tuple:
        return self.modes.shape

    def frequencies(self) -> list:
        return [2 * np.pi * fft.fftfreq(n, d=p / n) for n, p in zip(self.shape, self.period)]

    def multiplier(self) -> np.ndarray:
        m = np.zeros(self.shape)
        for k, (xi, a, c) in enumerate(zip(self.frequencies(), self.exponents.alphas, self.coefficients)):
            bshape = [1] * self.d
            bshape[k] = xi.size
            m = m + c * np.abs(xi).reshape(bshape) ** a
        return m

    def with_modes(self, modes) -> "SpectralField":
        return replace(self, modes=np.asarray(modes, dtype=complex))

    def __add__(self, other: "SpectralField") -> "SpectralField":
        return self.with_modes(self.modes + other.modes)

    def __mul__(self, s: float) -> "SpectralField":
        return self.with_modes(self.modes * s)

    __rmul__ = __mul__

    # -- evaluation -------------------------------------------------------

    def _basis(self, k: int, x) -> np.ndarray:
        xi = self.frequencies()[k]
        return np.exp(1j * np.multiply.outer(np.asarray(x, dtype=float) + self.period[k] / 2, xi))

    def grid_values(self) -> np.ndarray:
        """Values at the interpolation nodes."""
        return np.real(fft.ifftn(self.modes * self.modes.size))

    def evaluate(self, points, chunk: int = 4096) -> np.ndarray:
        """Real part of the truncated series at arbitrary points ``(..., d)``."""
        pts = np.asarray(points, dtype=float)
        flat = pts.reshape(-1, self.d)
        out = np.empty(flat.shape[0])
        for s in range(0, flat.shape[0], chunk):
            p = flat[s:s + chunk]
            acc = np.einsum("nm,m...->n...", self._basis(0, p[:, 0]), self.modes)
            for k in range(1, self.d):
                acc = np.einsum("nm,nm...->n...", self._basis(k, p[:, k]), acc)
            out[s:s + chunk] = acc.real
        return out.reshape(pts.shape[:-1])

    def evaluate_tensor(self, axes_points: list) -> np.ndarray:
        """Values on the tensor grid ``axes_points[0] x ... x axes_points[d-1]``."""
        acc = self.modes
        for k in range(self.d):
            acc = np.tensordot(self._basis(k, axes_points[k]), acc, axes=([1], [k]))
            acc = np.moveaxis(acc, 0, k)
        return acc.real


def apply_operator(u: SpectralField) -> SpectralField:
    return u.with_modes(-u.multiplier() * u.modes)


def evolve(u0: SpectralField, t: float) -> SpectralField:
    if t < 0:
        raise ValueError("t must be nonnegative")
    return u0.with_modes(np.exp(-t * u0.multiplier()) * u0.modes)


def evolve_forced(u0: SpectralField, f, t: float, steps: int) -> SpectralField:
    """Exponential Euler for ``u' = Lu + f``.

    ``f`` is None, a SpectralField, or a callable ``f(s) -> SpectralField``
    evaluated at the left end of each step.
    """
    if t < 0 or steps < 1:
        raise ValueError("need t >= 0 and steps >= 1")
    m = u0.multiplier()
    dt = t / steps
    decay = np.exp(-dt * m)
    gain = dt * phi1(-dt * m)
    modes = u0.modes
    for n in range(steps):
        if f is None:
            fn = 0.0
        else:
            fn = (f(n * dt) if callable(f) else f).modes
        modes = decay * modes + gain * fn
    return u0.with_modes(modes)


def sample_to_grid(u: SpectralField, box: AnisoBox, resolution) -> GridFunction:
    if box.d != u.d:
        raise ValueError("dimension mismatch")
    if np.any(2.0 * box.half_widths > u.period * (1 + 1e-12)):
        raise ValueError("box exceeds one period cell")
    res = (int(resolution),) * u.d if np.ndim(resolution) == 0 else tuple(int(r) for r in resolution)
    c = cell_centers(box, res)
    axes = [np.moveaxis(c[..., k], k, 0).reshape(res[k], -1)[:, 0] for k in range(u.d)]
    ext = "periodic" if np.allclose(2.0 * box.half_widths, u.period) else "zero"
    return GridFunction(box, u.evaluate_tensor(axes), ext)


def positivity_floor(u: SpectralField, region: AnisoBox | None = None, resolution: int | None = None) -> float:
    """Minimum over a fine grid of ``region`` (the whole torus when None)."""
    if region is None:
        factor = 4
        padded = np.zeros(tuple(factor * n for n in u.shape), dtype=complex)
        idx = tuple(np.r_[0:(n + 1) // 2, factor * n - n // 2:factor * n] for n in u.shape)
        padded[np.ix_(*idx)] = u.modes
        return float(np.min(np.real(fft.ifftn(padded * padded.size))))
    n = resolution or 4 * max(u.shape)
    axes = [np.linspace(region.lower[k], region.upper[k], n) for k in range(u.d)]
    return float(np.min(u.evaluate_tensor(axes)))
