"""Algebraic inequalities, Moser schedules and the Bombieri-Giusti checker."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .geometry import Cylinder, ExponentVector, aniso_box

__all__ = [
    "theta",
    "zeta",
    "GuelleResult",
    "check_guelle1",
    "check_guelle2",
    "SweepResult",
    "guelle_sweep",
    "MoserScheduleNeg",
    "MoserSchedulePos",
    "MoserProduct",
    "ExponentSums",
    "moser_product_bound",
    "moser_exponent_sums",
    "BGParams",
    "BGReport",
    "bombieri_giusti_check",
    "cylinder_family",
    "holder_gamma",
]

SLACK = 1e-12


def theta(q):
    """``max(4, (6q - 5)/2)`` for ``q > 1``."""
    q = np.asarray(q, dtype=float)
    out = np.maximum(4.0, 0.5 * (6.0 * q - 5.0))
    return float(out) if out.ndim == 0 else out


def zeta(q):
    """``4q/(1 - q)`` for ``q`` in ``(0, 1)``."""
    q = np.asarray(q, dtype=float)
    out = 4.0 * q / (1.0 - q)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class GuelleResult:
    lhs: np.ndarray
    rhs: np.ndarray
    scale: np.ndarray
    ok: np.ndarray

    @property
    def violations(self) -> int:
        return int(np.size(self.ok) - np.count_nonzero(self.ok))


def _ratio_power(tau, x, e):
    """``(x / tau)^(-e)`` written as ``(tau / x)^e`` with ``e > 0``; zero when ``tau = 0``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(tau > 0, (tau / x) ** e, 0.0)


def _result(lhs, parts, slack):
    lhs = np.asarray(lhs, dtype=float)
    rhs = parts[0] - parts[1]
    scale = np.abs(lhs) + np.abs(parts[0]) + np.abs(parts[1])
    ok = lhs >= rhs - slack * scale
    if lhs.ndim == 0:
        return GuelleResult(float(lhs), float(rhs), float(scale), bool(ok))
    return GuelleResult(lhs, rhs, scale, ok)


def check_guelle1(a, b, tau1, tau2, q, slack: float = SLACK) -> GuelleResult:
    """Inequality for ``q > 1``; ``(x/0)^(1-q)`` is read as 0."""
    a, b, t1, t2, q = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, tau1, tau2, q)))
    if np.any(q <= 1) or np.any(a <= 0) or np.any(b <= 0) or np.any(t1 < 0) or np.any(t2 < 0):
        raise ValueError("need q > 1, a, b > 0 and tau >= 0")
    lhs = (b - a) * (t1 ** (q + 1) * a**-q - t2 ** (q + 1) * b**-q)
    half = 0.5 * (q - 1.0)
    xb, xa = _ratio_power(t2, b, half), _ratio_power(t1, a, half)
    first = t1 * t2 * (xb - xa) ** 2 / (q - 1.0)
    second = theta(q) * (t2 - t1) ** 2 * (_ratio_power(t2, b, q - 1.0) + _ratio_power(t1, a, q - 1.0))
    return _result(lhs, (first, second), slack)


def check_guelle2(a, b, tau1, tau2, q, slack: float = SLACK) -> GuelleResult:
    """Inequality for ``q`` in ``(0, 1)`` with ``zeta_1 = zeta/6`` and ``zeta_2 = zeta + 9/q``."""
    a, b, t1, t2, q = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, tau1, tau2, q)))
    if np.any(q <= 0) or np.any(q >= 1) or np.any(a <= 0) or np.any(b <= 0) or np.any(t1 < 0) or np.any(t2 < 0):
        raise ValueError("need q in (0, 1), a, b > 0 and tau >= 0")
    z = zeta(q)
    lhs = (b - a) * (t1**2 * a**-q - t2**2 * b**-q)
    e = 0.5 * (1.0 - q)
    first = z / 6.0 * (t2 * b**e - t1 * a**e) ** 2
    second = (z + 9.0 / q) * (t2 - t1) ** 2 * (b ** (1.0 - q) + a ** (1.0 - q))
    return _result(lhs, (first, second), slack)


@dataclass(frozen=True)
class SweepResult:
    count: int
    violations: int
    worst: float  # largest (rhs - lhs) / scale seen
    worst_tuple: tuple


def guelle_sweep(which: int, count: int = 10**6, seed: int = 0, batch: int = 100_000, slack: float = SLACK) -> SweepResult:
    """Random tuples ``a, b in (0, 10]``, ``tau in [0, 1]`` and ``q`` in ``(1, 10]`` or ``(0, 1)``.

    A few percent of the tuples set ``tau_1`` or ``tau_2`` to zero or take
    ``a = b`` so that the degenerate branches are exercised.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    check = check_guelle1 if which == 1 else check_guelle2
    violations, worst, worst_tuple = 0, -math.inf, ()
    for k, start in enumerate(range(0, count, batch)):
        n = min(batch, count - start)
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(which, k))))
        a = 10.0 - rng.uniform(0.0, 10.0, n)
        b = 10.0 - rng.uniform(0.0, 10.0, n)
        t1 = rng.uniform(0.0, 1.0, n)
        t2 = rng.uniform(0.0, 1.0, n)
        u = 1.0 - rng.uniform(0.0, 1.0, n)  # (0, 1]
        q = 1.0 + 9.0 * u if which == 1 else np.where(u < 1.0, u, 0.5)
        kind = rng.uniform(0.0, 1.0, n)
        t1 = np.where(kind < 0.03, 0.0, t1)
        t2 = np.where((kind >= 0.03) & (kind < 0.06), 0.0, t2)
        b = np.where((kind >= 0.06) & (kind < 0.08), a, b)
        res = check(a, b, t1, t2, q, slack)
        violations += res.violations
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = np.where(res.scale > 0, (res.rhs - res.lhs) / res.scale, 0.0)
        i = int(np.argmax(rel))
        if rel[i] > worst:
            worst, worst_tuple = float(rel[i]), (float(a[i]), float(b[i]), float(t1[i]), float(t2[i]), float(q[i]))
    return SweepResult(count, violations, worst, worst_tuple)


# ---------------------------------------------------------------------------
# Moser schedules


@dataclass(frozen=True)
class MoserScheduleNeg:
    """``r_j = r + (R - r)/2^j``, ``p_j = p kappa^j`` and ``A_j = c (p_j + 1)^2 (r_j - r_{j+1})^(-a_max)``."""

    r: float
    R: float
    p: float
    kappa: float
    alpha_max: float
    d: int
    alpha0: float

    def __post_init__(self):
        if not 0.5 <= self.r < self.R <= 1.0:
            raise ValueError("need 1/2 <= r < R <= 1")
        if not self.p > 0 or not self.kappa > 1:
            raise ValueError("need p > 0 and kappa > 1")

    @classmethod
    def from_exponents(cls, ev: ExponentVector, r: float, R: float, p: float) -> "MoserScheduleNeg":
        return cls(r, R, p, ev.kappa, ev.alpha_max, ev.d, ev.alpha0)

    def radius(self, j):
        return self.r + (self.R - self.r) / 2.0 ** np.asarray(j, dtype=float)

    def exponent(self, j):
        return self.p * self.kappa ** np.asarray(j, dtype=float)

    def log_amplification(self, j, c: float = 1.0):
        j = np.asarray(j, dtype=float)
        gap = (self.R - self.r) / 2.0 ** (j + 1.0)
        return math.log(c) + 2.0 * np.log1p(self.exponent(j)) - self.alpha_max * np.log(gap)

    @property
    def power(self) -> float:
        """``d a_max / a_0 + a_max``."""
        return self.d * self.alpha_max / self.alpha0 + self.alpha_max


@dataclass(frozen=True)
class MoserProduct:
    product: float
    log_product: float
    terms: int
    tail_bound: float  # bound on the omitted part of log_product
    c3: float  # product * (R - r)^power
    power: float


def _geometric_tail(x: float, J: int) -> tuple[float, float]:
    """``sum_{j > J} x^j`` and ``sum_{j > J} j x^j`` for ``0 < x < 1``."""
    s0 = x ** (J + 1) / (1.0 - x)
    s1 = x ** (J + 1) * ((J + 1) - J * x) / (1.0 - x) ** 2
    return s0, s1


def moser_product_bound(schedule: MoserScheduleNeg, c: float = 1.0, depth: int | None = None, tol: float = 1e-13) -> MoserProduct:
    """``prod_j A_j^(1/kappa^j)`` summed in log form until the analytic tail is below ``tol``.

    With ``pk^j + 1 <= (p + 1) k^j`` one has ``|log A_j| <= a + b j``, whose
    weighted tail is a pair of geometric series.  ``depth`` forces a fixed
    number of terms instead.
    """
    s = schedule
    x = 1.0 / s.kappa
    a = abs(math.log(c)) + 2.0 * math.log1p(s.p) + s.alpha_max * abs(math.log(2.0) - math.log(s.R - s.r))
    b = 2.0 * math.log(s.kappa) + s.alpha_max * math.log(2.0)
    total = []
    J = -1
    while True:
        J += 1
        total.append(float(s.log_amplification(J, c)) * x**J)
        s0, s1 = _geometric_tail(x, J)
        tail = a * s0 + b * s1
        if depth is not None:
            if J + 1 >= depth:
                break
        elif tail < tol:
            break
        if J > 100_000:
            raise ArithmeticError("Moser product failed to converge")
    log_p = math.fsum(total)
    return MoserProduct(math.exp(log_p), log_p, J + 1, tail, math.exp(log_p + s.power * math.log(s.R - s.r)), s.power)


@dataclass(frozen=True)
class MoserSchedulePos:
    """``p_j = kappa^(-j)`` for ``j = 1..n`` with ``p_n <= p < p_{n-1}``."""

    p: float
    kappa: float
    n: int = field(init=False)

    def __post_init__(self):
        if not self.kappa > 1:
            raise ValueError("kappa must exceed 1")
        # the endpoint p = 1/kappa is admitted so that n = 1 is reachable
        if not 0 < self.p <= 1.0 / self.kappa:
            raise ValueError("p must lie in (0, 1/kappa]")
        n = max(1, math.ceil(math.log(1.0 / self.p) / math.log(self.kappa)))
        while self.kappa**-n > self.p:
            n += 1
        while n > 1 and self.kappa ** -(n - 1) <= self.p:
            n -= 1
        object.__setattr__(self, "n", n)

    @classmethod
    def from_n(cls, n: int, kappa: float) -> "MoserSchedulePos":
        """Schedule whose ``p`` sits exactly on ``p_n``."""
        return cls(kappa ** -int(n), kappa)

    def exponent(self, j):
        return self.kappa ** -np.asarray(j, dtype=float)


@dataclass(frozen=True)
class ExponentSums:
    sum_kappa: float
    sum_weighted: float
    identity_exact: bool  # holds in exact rational arithmetic
    identity_error: float  # floating-point residual, relative
    bound: float
    bound_holds: bool


def moser_exponent_sums(schedule: MoserSchedulePos) -> ExponentSums:
    """``sum_{j=1}^n kappa^j`` against ``(beta + 1)(1/p_n - 1)`` and the weighted-sum bound.

    ``kappa`` is taken at its exact binary value, so the identity is checked
    without rounding; the floating sums are reported alongside.
    """
    n = schedule.n
    k = Fraction(schedule.kappa)
    beta1 = k / (k - 1)  # beta + 1 with beta = 1/(kappa - 1)
    inv_pn = k**n
    s_exact = sum(k**j for j in range(1, n + 1))
    w_exact = sum((n - j + 1) * k**j for j in range(1, n + 1))
    bound_exact = k**3 / (k - 1) ** 3 * (inv_pn - 1)
    identity = s_exact == beta1 * (inv_pn - 1)
    kf = schedule.kappa
    s = math.fsum(kf**j for j in range(1, n + 1))
    rhs = kf / (kf - 1.0) * (kf**n - 1.0)
    return ExponentSums(s, float(w_exact), identity, abs(s - rhs) / rhs, float(bound_exact), w_exact <= bound_exact)


# ---------------------------------------------------------------------------
# Bombieri-Giusti


@dataclass(frozen=True)
class BGParams:
    m: float
    c0: float
    theta: float = 0.5
    eta: float = 0.5
    p0: float = math.inf

    def __post_init__(self):
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [1/2, 1]")
        if not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")
        if not self.p0 > 0 or self.m <= 0 or self.c0 <= 0:
            raise ValueError("m, c0 and p0 must be positive")


@dataclass
class BGReport:
    c0_first: float  # smallest c0 satisfying the log-measure hypothesis on the grid
    c0_second: float  # smallest c0 satisfying the reverse Hoelder hypothesis on the grid
    first_ok: bool
    second_ok: bool
    first_violations: list
    second_violations: list
    C: float  # smallest constant in the conclusion
    C_scale_free: float  # C divided by the geometric mean of w over U(1)
    volume: float

    @property
    def hypotheses_ok(self) -> bool:
        return self.first_ok and self.second_ok


def cylinder_family(ev: ExponentVector, kind: str = "Q-") -> Callable[[float], Cylinder]:
    """``r -> (-r^a_max, 0) x M_r(0)`` for ``Q-`` and ``(0, r^a_max) x M_r(0)`` for ``Q+``."""
    zero = np.zeros(ev.d)

    def family(r: float) -> Cylinder:
        ra = r**ev.alpha_max
        if kind == "Q-":
            return Cylinder(-ra, 0.0, aniso_box(zero, r, ev), "generic")
        if kind == "Q+":
            return Cylinder(0.0, ra, aniso_box(zero, r, ev), "generic")
        raise ValueError(f"unknown family {kind!r}")

    return family


def _power_mean(vals, weights, mask, p):
    if math.isinf(p):
        return float(np.max(vals[mask])) if np.any(mask) else 0.0
    return float(np.sum(weights[mask] * vals[mask] ** p)) ** (1.0 / p)


def bombieri_giusti_check(
    w: Callable,
    U: Callable[[float], Cylinder],
    params: BGParams,
    resolution: int = 24,
    time_resolution: int = 24,
    s_points: int = 64,
    radii: int = 16,
    p_points: int = 8,
) -> BGReport:
    """Check both hypotheses on grids and report the smallest constants.

    ``w(t, points)`` is evaluated at the midpoints of a tensor grid of
    ``U(1)``; integrals over ``U(r)`` use the grid cells whose midpoints lie
    in ``U(r)``.  ``s`` runs over a logarithmic grid from ``1e-2`` to ``1e3``,
    ``r < R`` over a triangular grid of ``[theta, 1]`` and ``p`` over
    log-spaced points below ``min(1, eta p0)``.
    """
    U1 = U(1.0)
    d = U1.box.d
    ts = U1.t_lo + (np.arange(time_resolution) + 0.5) * U1.duration / time_resolution
    axes = [U1.box.lower[k] + (np.arange(resolution) + 0.5) * 2.0 * U1.box.half_widths[k] / resolution for k in range(d)]
    xs = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, d)
    vals = np.concatenate([np.asarray(w(t, xs), dtype=float).ravel() for t in ts])
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise ValueError("w must be positive and finite")
    tt = np.repeat(ts, len(xs))
    xx = np.tile(xs, (len(ts), 1))
    cell = U1.volume / vals.size
    weights = np.full(vals.size, cell)
    vol1 = U1.volume

    # log-measure hypothesis
    logw = np.log(vals)
    first_viol, c0_first = [], 0.0
    for s in np.geomspace(1e-2, 1e3, s_points):
        meas = float(np.sum(weights[logw > s]))
        c0_first = max(c0_first, s * meas / vol1)
        if meas > params.c0 / s * vol1 * (1.0 + 1e-12):
            first_viol.append((float(s), meas, params.c0 / s * vol1))

    # reverse Hoelder hypothesis
    masks = {}

    def mask(r):
        if r not in masks:
            masks[r] = U(r).contains(tt, xx)
        return masks[r]

    grid_r = np.linspace(params.theta, 1.0, radii)
    pmax = min(1.0, params.eta * params.p0)
    ps = np.geomspace(pmax / 128.0, pmax, p_points, endpoint=False)
    second_viol, c0_second = [], 0.0
    for i, r in enumerate(grid_r):
        lhs = _power_mean(vals, weights, mask(r), params.p0)
        for R in grid_r[i + 1:]:
            for p in ps:
                e = 1.0 / p - (0.0 if math.isinf(params.p0) else 1.0 / params.p0)
                mean_p = _power_mean(vals, weights, mask(R), p)
                need = (R - r) ** params.m * vol1 * (lhs / mean_p) ** (1.0 / e)
                c0_second = max(c0_second, need)
                log_rhs = e * (math.log(params.c0) - params.m * math.log(R - r) - math.log(vol1)) + math.log(mean_p)
                rhs = math.exp(min(log_rhs, 700.0))
                if math.log(lhs) > log_rhs + 1e-12:
                    second_viol.append((float(r), float(R), float(p), lhs, rhs))

    conclusion = _power_mean(vals, weights, mask(params.theta), params.p0)
    C = conclusion / (1.0 if math.isinf(params.p0) else vol1 ** (1.0 / params.p0))
    gmean = math.exp(float(np.sum(weights * logw)) / float(np.sum(weights)))
    return BGReport(c0_first, c0_second, not first_viol, not second_viol, first_viol, second_viol, C, C / gmean, vol1)


# ---------------------------------------------------------------------------


def holder_gamma(delta: float, gamma0: float) -> float:
    """``min(gamma0, log(2/(2 - delta))/log 6)``; then ``1 - delta/2 <= 6^(-gamma)``.

    The inequality is an equality on the second branch.
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if not 0 < gamma0 <= 1:
        raise ValueError("gamma0 must lie in (0, 1]")
    return min(gamma0, math.log(2.0 / (2.0 - delta)) / math.log(6.0))
