"""Axis-jumping stable processes and Monte Carlo checks on solutions.

The process ``Z_t = (Z^1_t, ..., Z^d_t)`` has independent symmetric
``alpha_k``-stable components with ``E exp(i xi Z^k_t) = exp(-t c_k |xi|^alpha_k)``,
so ``u(t, x) = E g(x + Z_t)`` solves the equation whose symbol is
``-sum_k c_k |xi_k|^alpha_k`` with initial datum ``g``.

Random numbers come from Philox streams keyed by ``(seed, component, block)``.
Paths are grouped in blocks of fixed size, so every estimate is a
deterministic function of the seed whatever the number of worker threads.
"""
from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .geometry import Cylinder, ExponentVector, standard_cylinders
from .spectral import SpectralField, axes_multiplier, phi1

__all__ = [
    "StableSampler",
    "PathEnsemble",
    "EnsembleEstimate",
    "HarnackResult",
    "OscillationResult",
    "HolderResult",
    "BLOCK",
    "sample_increment",
    "estimate_solution",
    "spectral_accessor",
    "harnack_ratio",
    "oscillation_decay",
    "holder_quotient",
]

BLOCK = 4096
ENSEMBLE_CSV_VERSION = "anisoreg-ensemble v1"


def _stream(seed: int, component: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(component), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def _cms(alpha: float, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Chambers-Mallows-Stuck map for the standard symmetric law ``exp(-|xi|^alpha)``."""
    if alpha == 1.0:
        return np.tan(v)
    return np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha) * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)


@dataclass(frozen=True)
class StableSampler:
    """Symmetric stable law with ``E exp(i xi X_dt) = exp(-dt scale |xi|^alpha)``."""

    alpha: float
    scale: float = 1.0
    seed: int = 0
    component: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def generator(self, block: int = 0) -> np.random.Generator:
        return _stream(self.seed, self.component, block)

    def draw(self, dt: float, size: int, block: int = 0) -> np.ndarray:
        if not dt > 0:
            raise ValueError("dt must be positive")
        rng = self.generator(block)
        v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, size)
        w = rng.standard_exponential(size)
        return (self.scale * dt) ** (1.0 / self.alpha) * _cms(self.alpha, v, w)


def sample_increment(s: StableSampler, dt: float, size: int | None = None, block: int = 0):
    """One increment (or ``size`` of them) over a time step ``dt``."""
    out = s.draw(dt, 1 if size is None else size, block)
    return float(out[0]) if size is None else out


@dataclass(frozen=True)
class PathEnsemble:
    samplers: tuple
    N: int
    T: float = 1.0

    @classmethod
    def build(cls, ev: ExponentVector, N: int, T: float = 1.0, coefficients=None, seed: int = 0) -> "PathEnsemble":
        c = axes_multiplier(ev) if coefficients is None else np.broadcast_to(np.asarray(coefficients, float), (ev.d,))
        samplers = tuple(StableSampler(a, float(ck), seed, k) for k, (a, ck) in enumerate(zip(ev.alphas, c)))
        return cls(samplers, int(N), float(T))

    @property
    def d(self) -> int:
        return len(self.samplers)

    @property
    def blocks(self) -> list:
        """``(index, size)`` for every block of paths."""
        full, rest = divmod(self.N, BLOCK)
        return [(b, BLOCK) for b in range(full)] + ([(full, rest)] if rest else [])

    def marginal(self, t: float, block: int, size: int = BLOCK) -> np.ndarray:
        """``Z_t`` for the paths of one block, shape ``(size, d)``."""
        if not 0.0 < t <= self.T:
            raise ValueError("t must lie in (0, T]")
        return np.stack([s.draw(t, size, block) for s in self.samplers], axis=1)

    def paths(self, times: Sequence[float], block: int, size: int = BLOCK) -> np.ndarray:
        """Positions at increasing ``times``, shape ``(len(times), size, d)``.

        Increments over successive intervals are drawn from one stream per
        component in order, so they are independent.
        """
        times = np.asarray(times, dtype=float)
        dts = np.diff(np.concatenate([[0.0], times]))
        if np.any(dts <= 0) or times[-1] > self.T:
            raise ValueError("times must increase within (0, T]")
        out = np.empty((len(times), size, self.d))
        for k, s in enumerate(self.samplers):
            rng = s.generator(block)
            v = rng.uniform(-0.5 * np.pi, 0.5 * np.pi, (len(times), size))
            w = rng.standard_exponential((len(times), size))
            steps = (s.scale * dts[:, None]) ** (1.0 / s.alpha) * _cms(s.alpha, v, w)
            out[..., k] = np.cumsum(steps, axis=0)
        return out


# ---------------------------------------------------------------------------
# Monte Carlo solutions


@dataclass(frozen=True)
class EnsembleEstimate:
    points: np.ndarray
    t: float
    estimate: np.ndarray
    stderr: np.ndarray
    N: int
    seed: int

    def to_csv(self) -> str:
        out = io.StringIO()
        d = self.points.shape[-1]
        out.write(f"# {ENSEMBLE_CSV_VERSION}\n")
        out.write(",".join(f"x{k + 1}" for k in range(d)) + ",t,estimate,stderr,N,seed\n")
        for p, e, s in zip(self.points, self.estimate, self.stderr):
            row = [repr(float(v)) for v in p] + [repr(self.t), repr(float(e)), repr(float(s)), str(self.N), str(self.seed)]
            out.write(",".join(row) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "EnsembleEstimate":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or ENSEMBLE_CSV_VERSION not in lines[0]:
            raise ValueError("not an ensemble CSV")
        header = lines[1].split(",")
        d = header.index("t")
        data = np.loadtxt(io.StringIO("\n".join(lines[2:])), delimiter=",", ndmin=2)
        return cls(data[:, :d], float(data[0, d]), data[:, d + 1], data[:, d + 2], int(data[0, d + 3]), int(data[0, d + 4]))


def _combine(a, b):
    """Chan et al. pairwise update of ``(count, mean, M2)``."""
    na, ma, sa = a
    nb, mb, sb = b
    n = na + nb
    delta = mb - ma
    return n, ma + delta * (nb / n), sa + sb + delta * delta * (na * nb / n)


def estimate_solution(
    g: Callable,
    ev: ExponentVector,
    t: float,
    x_points,
    N: int,
    coefficients=None,
    seed: int = 0,
    workers: int = 1,
) -> EnsembleEstimate:
    """Monte Carlo ``u(t, x) = E g(x + Z_t)`` with per-point standard errors.

    ``g`` maps an array of points ``(..., d)`` to values.  ``coefficients``
    defaults to the multiplier of the axes measure.
    """
    pts = np.atleast_2d(np.asarray(x_points, dtype=float))
    if pts.shape[-1] != ev.d:
        raise ValueError("points have the wrong dimension")
    if t < 0 or N < 1:
        raise ValueError("need t >= 0 and N >= 1")
    if t == 0:
        vals = np.asarray(g(pts), dtype=float)
        return EnsembleEstimate(pts, 0.0, vals, np.zeros_like(vals), int(N), int(seed))
    ens = PathEnsemble.build(ev, N, t, coefficients, seed)

    def run(block):
        b, size = block
        z = ens.marginal(t, b, size)
        v = np.asarray(g(pts[None, :, :] + z[:, None, :]), dtype=float)
        mean = v.mean(axis=0)
        return size, mean, np.sum((v - mean) ** 2, axis=0)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, ens.blocks))
    else:
        parts = [run(b) for b in ens.blocks]
    acc = parts[0]
    for p in parts[1:]:
        acc = _combine(acc, p)
    n, mean, m2 = acc
    stderr = np.sqrt(m2 / (n - 1) / n) if n > 1 else np.zeros_like(mean)
    return EnsembleEstimate(pts, float(t), mean, stderr, int(N), int(seed))


def spectral_accessor(u0: SpectralField, t0: float = 0.0, forcing: SpectralField | None = None):
    """``u(t, points)`` for the solution started from ``u0`` at time ``t0``.

    The forcing, if any, is constant in time, so the exponential integrator
    is exact in one step.  The returned callable also has a ``pairs(ts, xs)``
    method evaluating ``u(ts[i], xs[i])`` in bulk.
    """
    m = u0.multiplier()
    fmodes = None if forcing is None else forcing.modes

    def modes_at(s):
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise ValueError("time precedes the initial time")
        e = np.exp(-np.multiply.outer(s, m))
        out = e * u0.modes
        if fmodes is not None:
            out = out + np.multiply.outer(s, np.ones_like(m)) * phi1(-np.multiply.outer(s, m)) * fmodes
        return out

    def u(t, points):
        return u0.with_modes(modes_at(float(t) - t0)).evaluate(points)

    def pairs(ts, xs, chunk: int = 512):
        ts = np.asarray(ts, dtype=float)
        xs = np.asarray(xs, dtype=float)
        out = np.empty(len(ts))
        for a in range(0, len(ts), chunk):
            c = modes_at(ts[a:a + chunk] - t0)
            acc = c * u0._basis(0, xs[a:a + chunk, 0]).reshape((-1, c.shape[1]) + (1,) * (u0.d - 1))
            for k in range(1, u0.d):
                shape = [-1] + [1] * u0.d
                shape[k + 1] = c.shape[k + 1]
                acc = acc * u0._basis(k, xs[a:a + chunk, k]).reshape(shape)
            out[a:a + chunk] = np.real(acc.reshape(len(c), -1).sum(axis=1))
        return out

    u.pairs = pairs
    return u


# ---------------------------------------------------------------------------
# weak Harnack ratio


@dataclass(frozen=True)
class HarnackResult:
    ratio: float
    l1_early: float
    inf_late: float
    f_sup: float


def _box_grid(box, n: int, closed: bool) -> np.ndarray:
    axes = []
    for k in range(box.d):
        if closed:
            axes.append(np.linspace(box.lower[k], box.upper[k], n))
        else:
            h = (box.upper[k] - box.lower[k]) / n
            axes.append(box.lower[k] + (np.arange(n) + 0.5) * h)
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1)


def _check_nonnegative(vals, t, pts):
    if np.min(vals) < 0:
        i = int(np.argmin(vals))
        raise ValueError(f"u is negative ({vals.flat[i]:.3e}) at t={t}, x={pts.reshape(-1, pts.shape[-1])[i]}")


def harnack_ratio(
    u: Callable, f_sup: float, ev: ExponentVector, resolution: int = 16, time_nodes: int = 8
) -> HarnackResult:
    """``||u||_{L^1(U-)} / (inf_{U+} u + f_sup)``.

    The L^1 norm uses Gauss-Legendre nodes in time and the midpoint rule in
    space; the infimum is a minimum over a closed grid of ``U+``, which
    over-estimates the true infimum by at most the modulus of continuity of
    ``u`` at the grid scale.
    """
    if f_sup < 0:
        raise ValueError("f_sup must be nonnegative")
    cyl = standard_cylinders(ev)
    early, late = cyl["U-"], cyl["U+"]
    x, w = np.polynomial.legendre.leggauss(time_nodes)
    ts = early.t_lo + 0.5 * (x + 1.0) * early.duration
    wt = 0.5 * w * early.duration
    pts = _box_grid(early.box, resolution, closed=False)
    cell = early.box.volume / pts[..., 0].size
    l1 = 0.0
    for t, wk in zip(ts, wt):
        vals = np.asarray(u(t, pts))
        _check_nonnegative(vals, t, pts)
        l1 += wk * cell * float(np.sum(vals))
    pts = _box_grid(late.box, resolution + 1, closed=True)
    low = math.inf
    for t in np.linspace(late.t_lo, late.t_hi, time_nodes + 1):
        vals = np.asarray(u(t, pts))
        _check_nonnegative(vals, t, pts)
        low = min(low, float(np.min(vals)))
    denom = low + f_sup
    ratio = l1 / denom if denom > 0 else math.inf
    return HarnackResult(ratio, l1, low, float(f_sup))


# ---------------------------------------------------------------------------
# oscillation decay and Hoelder quotients


@dataclass(frozen=True)
class OscillationResult:
    radii: np.ndarray
    osc: np.ndarray
    gamma: float
    nonincreasing: bool
    unresolved: tuple  # levels whose oscillation sits at the round-off floor


def _dhat_samples(u: Callable, ev: ExponentVector, r: float, n_space: int, n_time: int):
    cyl = standard_cylinders(ev, r)["Dhat"]
    pts = _box_grid(cyl.box, n_space, closed=False)
    centre = np.zeros((1,) * ev.d + (ev.d,))
    ts = cyl.t_lo + (np.arange(n_time) + 0.5) * cyl.duration / n_time
    vals = [np.asarray(u(t, pts)).ravel() for t in ts]
    vals.append(np.asarray(u(cyl.t_hi - 0.5 * cyl.duration / n_time, centre)).ravel())
    return np.concatenate(vals)


def oscillation_decay(
    u: Callable, ev: ExponentVector, nu_max: int = 3, n_space: int = 17, n_time: int = 9, floor: float = 1e-10
) -> OscillationResult:
    """Oscillation of ``u`` over ``D^(6^-nu)`` for ``nu = 0..nu_max`` and a fitted exponent.

    Samples of the smaller sets are reused for the larger ones (the sets are
    nested), so the sampled oscillation is nonincreasing by construction.
    ``gamma`` is minus the least-squares slope of ``log osc`` against
    ``nu log 6``; levels whose oscillation falls below ``floor`` times the
    largest one are reported as unresolved and excluded from the fit.
    """
    radii = 6.0 ** -np.arange(nu_max + 1, dtype=float)
    samples = [_dhat_samples(u, ev, r, n_space, n_time) for r in radii]
    osc = np.empty(nu_max + 1)
    hi, lo = -np.inf, np.inf
    for nu in range(nu_max, -1, -1):
        hi = max(hi, float(samples[nu].max()))
        lo = min(lo, float(samples[nu].min()))
        osc[nu] = hi - lo
    mono = bool(np.all(np.diff(osc) <= 0))
    ok = osc > floor * max(osc[0], 1e-300)
    unresolved = tuple(int(v) for v in np.flatnonzero(~ok))
    if ok.sum() >= 2:
        slope = np.polyfit(np.arange(nu_max + 1)[ok] * math.log(6.0), np.log(osc[ok]), 1)[0]
        gamma = float(-slope)
    else:
        gamma = math.inf if osc[0] == 0 else math.nan
    return OscillationResult(radii, osc, gamma, mono, unresolved)


@dataclass(frozen=True)
class HolderResult:
    quotient: float
    sup_norm: float
    eta: float
    pairs: int


def holder_quotient(
    u: Callable, ev: ExponentVector, Q_prime: Cylinder, gamma: float, sample_pairs: int = 10_000, seed: int = 0
) -> HolderResult:
    """Largest ``|u(t,x) - u(s,y)| / (|x - y| + |t - s|^(1/a_max))^gamma`` over random pairs.

    Half of the pairs are independent uniform points of ``Q'``; the other half
    pair a uniform point with a log-uniformly close neighbour, which probes
    the local modulus.  ``eta`` solves ``quotient = sup|u| / eta^gamma``.
    """
    rng = _stream(seed, 0, 0)
    d = ev.d
    lo = np.concatenate([[Q_prime.t_lo], Q_prime.box.lower])
    hi = np.concatenate([[Q_prime.t_hi], Q_prime.box.upper])
    n1 = sample_pairs // 2
    n2 = sample_pairs - n1
    p = rng.uniform(lo, hi, (sample_pairs, d + 1))
    q = np.empty_like(p)
    q[:n1] = rng.uniform(lo, hi, (n1, d + 1))
    step = np.exp(rng.uniform(math.log(1e-4), 0.0, (n2, 1))) * (hi - lo) * rng.uniform(-0.5, 0.5, (n2, d + 1))
    q[n1:] = np.clip(p[n1:] + step, lo, hi)
    if hasattr(u, "pairs"):
        up, uq = u.pairs(p[:, 0], p[:, 1:]), u.pairs(q[:, 0], q[:, 1:])
    else:
        up = np.array([float(np.asarray(u(t, x[None]))[0]) for t, x in zip(p[:, 0], p[:, 1:])])
        uq = np.array([float(np.asarray(u(t, x[None]))[0]) for t, x in zip(q[:, 0], q[:, 1:])])
    dist = np.linalg.norm(p[:, 1:] - q[:, 1:], axis=1) + np.abs(p[:, 0] - q[:, 0]) ** (1.0 / ev.alpha_max)
    diff = np.abs(up - uq)
    with np.errstate(divide="ignore", invalid="ignore"):
        quot = np.where(dist > 0, diff / dist**gamma, 0.0)
    qmax = float(np.max(quot))
    sup = float(max(np.max(np.abs(up)), np.max(np.abs(uq))))
    eta = (sup / qmax) ** (1.0 / gamma) if qmax > 0 else math.inf
    return HolderResult(qmax, sup, eta, int(sample_pairs))
