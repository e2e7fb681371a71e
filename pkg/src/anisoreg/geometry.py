"""Anisotropic boxes, slabs, cylinders and the parabolic scaling.

Every object here is built from an :class:`ExponentVector`.  Along axis ``k``
a box of radius ``r`` has half-width ``r**(alpha_max/alpha_k)``, so one time
unit ``r**alpha_max`` matches the intrinsic scale of every axis at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ExponentVector",
    "AnisoBox",
    "Slab",
    "Cylinder",
    "ScalingMap",
    "aniso_box",
    "slab",
    "aniso_metric",
    "rho_hat",
    "scaling_forward",
    "scaling_inverse",
    "standard_cylinders",
    "CYLINDER_TAGS",
]


@dataclass(frozen=True)
class ExponentVector:
    """Orders of differentiability ``alpha_1..alpha_d`` with floor ``alpha0``."""

    alphas: tuple
    alpha0: float | None = None

    def __post_init__(self):
        a = tuple(float(v) for v in np.atleast_1d(np.asarray(self.alphas, dtype=float)))
        if not a:
            raise ValueError("at least one exponent is required")
        a0 = min(a) if self.alpha0 is None else float(self.alpha0)
        if not 0.0 < a0 < 2.0:
            raise ValueError(f"alpha0 must lie in (0, 2), got {a0}")
        for k, ak in enumerate(a):
            if not (a0 <= ak < 2.0):
                raise ValueError(f"alpha_{k + 1} = {ak} is outside [{a0}, 2)")
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "alpha0", a0)

    @property
    def d(self) -> int:
        return len(self.alphas)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.alphas)

    @property
    def alpha_max(self) -> float:
        return max(self.alphas)

    @property
    def beta(self) -> float:
        return math.fsum(1.0 / a for a in self.alphas)

    @property
    def kappa(self) -> float:
        return 1.0 + 1.0 / self.beta

    @property
    def powers(self) -> np.ndarray:
        """Per-axis powers ``alpha_max / alpha_k``."""
        return self.alpha_max / self.array

    def half_widths(self, r: float) -> np.ndarray:
        return np.power(float(r), self.powers)


def _point(x, d: int) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim == 0:
        p = np.full(d, float(p))
    if p.shape[-1] != d:
        raise ValueError(f"expected points with {d} coordinates, got shape {p.shape}")
    return p


@dataclass(frozen=True)
class AnisoBox:
    """The open box ``M_r(center)``."""

    center: np.ndarray
    radius: float
    exponents: ExponentVector

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        c = _point(self.center, self.exponents.d).copy()
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def d(self) -> int:
        return self.exponents.d

    @property
    def half_widths(self) -> np.ndarray:
        return self.exponents.half_widths(self.radius)

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.half_widths

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.half_widths

    @property
    def volume(self) -> float:
        return float(np.prod(2.0 * self.half_widths))

    def contains(self, y) -> np.ndarray:
        y = _point(y, self.d)
        return np.all(np.abs(y - self.center) < self.half_widths, axis=-1)

    def scaled(self, factor: float) -> "AnisoBox":
        """Concentric box with radius multiplied by ``factor``."""
        return AnisoBox(self.center, self.radius * factor, self.exponents)

    def __eq__(self, other):
        if not isinstance(other, AnisoBox):
            return NotImplemented
        return (
            self.radius == other.radius
            and self.exponents == other.exponents
            and np.array_equal(self.center, other.center)
        )

    def __hash__(self):
        return hash((self.radius, self.exponents, self.center.tobytes()))


@dataclass(frozen=True)
class Slab:
    """The set ``E_r^k(center)`` of points within the k-th half-width along axis k."""

    center: np.ndarray
    radius: float
    axis: int
    exponents: ExponentVector

    @property
    def threshold(self) -> float:
        return float(self.exponents.half_widths(self.radius)[self.axis])

    def contains(self, y) -> np.ndarray:
        y = _point(y, self.exponents.d)
        return np.abs(y[..., self.axis] - self.center[self.axis]) < self.threshold


def aniso_box(x0, r: float, ev: ExponentVector) -> AnisoBox:
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    return AnisoBox(_point(x0, ev.d), r, ev)


def slab(x0, r: float, k: int, ev: ExponentVector) -> Slab:
    """Slab along the zero-based axis ``k``."""
    if not 0 <= k < ev.d:
        raise IndexError(f"axis {k} out of range for d={ev.d}")
    if not r > 0:
        raise ValueError(f"radius must be positive, got {r}")
    c = _point(x0, ev.d).copy()
    c.setflags(write=False)
    return Slab(c, float(r), int(k), ev)


def aniso_metric(x, y, ev: ExponentVector) -> np.ndarray:
    """``sup_k |x_k - y_k|**(alpha_k/alpha_max)``, vectorized over leading axes."""
    x = _point(x, ev.d)
    y = _point(y, ev.d)
    return np.max(np.abs(x - y) ** (1.0 / ev.powers), axis=-1)


def rho_hat(t, x, ev: ExponentVector):
    """Parabolic distance to the origin, infinite outside the window ``(-2, 0]``."""
    t = np.asarray(t, dtype=float)
    x = _point(x, ev.d)
    inside = (t > -2.0) & (t <= 0.0)
    tt = np.where(inside, -t, 0.0)
    val = np.maximum(0.5 * tt ** (1.0 / ev.alpha_max), aniso_metric(x, 0.0, ev) / 3.0)
    out = np.where(inside, val, np.inf)
    return float(out) if out.ndim == 0 else out


CYLINDER_TAGS = ("generic", "Q+", "Q-", "U+", "U-", "D+", "D-", "Dhat", "D")


@dataclass(frozen=True)
class Cylinder:
    """Open space-time cylinder ``(t_lo, t_hi) x box``."""

    t_lo: float
    t_hi: float
    box: AnisoBox
    tag: str = "generic"

    def __post_init__(self):
        if self.tag not in CYLINDER_TAGS:
            raise ValueError(f"unknown cylinder tag {self.tag!r}")
        if not self.t_lo < self.t_hi:
            raise ValueError("empty time interval")

    @property
    def duration(self) -> float:
        return self.t_hi - self.t_lo

    @property
    def volume(self) -> float:
        return self.duration * self.box.volume

    def contains(self, t, x) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return (t > self.t_lo) & (t < self.t_hi) & self.box.contains(x)


@dataclass(frozen=True)
class ScalingMap:
    """``(t, x) -> (r**a_max t + tau, r**(a_max/a_k) x_k + xi_k)``."""

    tau: float
    xi: np.ndarray
    r: float
    exponents: ExponentVector = field(compare=False)

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "xi", _point(self.xi, self.exponents.d))


def scaling_forward(m: ScalingMap, t, x):
    ev = m.exponents
    t = np.asarray(t, dtype=float)
    x = _point(x, ev.d)
    return m.r ** ev.alpha_max * t + m.tau, ev.half_widths(m.r) * x + m.xi


def scaling_inverse(m: ScalingMap, t, x):
    ev = m.exponents
    t = np.asarray(t, dtype=float)
    x = _point(x, ev.d)
    return (t - m.tau) / m.r ** ev.alpha_max, (x - m.xi) / ev.half_widths(m.r)


def standard_cylinders(ev: ExponentVector, r: float = 1.0, t0: float = 0.0, x0=0.0) -> dict:
    """The named cylinders used by the Harnack and oscillation arguments.

    ``Q+``/``Q-`` and ``Dhat``/``D`` depend on ``r`` (and ``Dhat`` on its vertex
    ``(t0, x0)``); the ``U`` and ``D+``/``D-`` cylinders are fixed at unit scale.
    """
    am = ev.alpha_max
    o = _point(x0, ev.d)
    zero = np.zeros(ev.d)
    half = aniso_box(zero, 0.5, ev)
    ra = r ** am
    s = 2.0 ** (-am)
    return {
        "Q+": Cylinder(0.0, ra, aniso_box(zero, r, ev), "Q+"),
        "Q-": Cylinder(-ra, 0.0, aniso_box(zero, r, ev), "Q-"),
        "U+": Cylinder(1.0 - s, 1.0, half, "U+"),
        "U-": Cylinder(-1.0, -1.0 + s, half, "U-"),
        "D-": Cylinder(-2.0, -2.0 + s, half, "D-"),
        "D+": Cylinder(-s, 0.0, half, "D+"),
        "Dhat": Cylinder(t0 - 2.0 * ra, t0, aniso_box(o, 3.0 * r, ev), "Dhat"),
        "D": Cylinder(-2.0 * ra, 0.0, aniso_box(zero, 2.0 * r, ev), "D"),
    }
