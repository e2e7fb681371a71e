"""Numerical checks of the functional inequalities built on the energy forms."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..geometry import AnisoBox, ExponentVector, aniso_box
from ..kernels import Axes, JumpMeasure
from .forms import assemble, restrict
from .grid import GridFunction, WeightFunction, psi_weighted_poincare

__all__ = [
    "PoincareResult",
    "poincare_constant",
    "RatioResult",
    "weighted_poincare_check",
    "sobolev_check",
    "ChainResult",
    "chain_lemma_check",
    "LogInequalityResult",
    "log_inequality_check",
    "ResidualResult",
    "weak_residual",
    "lambda_term",
]

SLACK = 1e-8


def lambda_term(ev: ExponentVector, r: float, lam: float) -> float:
    """``r^-alpha_max sum_k (lam^(alpha_max/alpha_k) - 1)^-alpha_k``."""
    return r ** -ev.alpha_max * math.fsum((lam ** p - 1.0) ** -a for p, a in zip(ev.powers, ev.alphas))


# ---------------------------------------------------------------------------
# Poincare


@dataclass(frozen=True)
class PoincareResult:
    constant: float
    evaluations: int
    exhausted: bool
    best: np.ndarray


def _step_library(shape) -> list:
    out = []
    for k, n in enumerate(shape):
        for cut in sorted({n // 4, n // 2, (3 * n) // 4}):
            idx = np.arange(n) < cut
            bshape = [1] * len(shape)
            bshape[k] = n
            out.append(np.broadcast_to(np.where(idx, 1.0, -1.0).reshape(bshape), shape).copy())
        z = (np.arange(n) + 0.5) / n
        bshape = [1] * len(shape)
        bshape[k] = n
        out.append(np.broadcast_to(np.cos(np.pi * z).reshape(bshape), shape).copy())
    return out


def poincare_constant(
    ev: ExponentVector,
    omega: AnisoBox,
    search_budget: int = 2000,
    resolution=32,
    starts: int = 20,
    seed: int = 0,
    scheme: str = "moment",
) -> PoincareResult:
    """Largest ``||u - [u]||^2 / (r^alpha_max E^axes(u, u))`` found on a grid of ``omega``.

    The quotient is maximized by a locally optimal block iteration: each
    step does a Rayleigh-Ritz solve on ``span{u, gradient, previous step}``
    of the mean-zero subspace.  The budget counts operator applications.
    """
    res = (int(resolution),) * ev.d if np.ndim(resolution) == 0 else tuple(resolution)
    spacing = 2.0 * omega.half_widths / np.asarray(res)
    vol = float(np.prod(spacing))
    K = assemble(Axes(ev), res, spacing, scheme=scheme)
    scale = omega.radius ** ev.alpha_max
    rng = np.random.default_rng(seed)
    evals = 0

    def op(x):
        nonlocal evals
        evals += 1
        return K.apply(x.reshape(res)).ravel() / vol

    def proj(x):
        x = x - x.mean()
        return x / np.linalg.norm(x)

    candidates = [proj(c.ravel()) for c in _step_library(res)]
    candidates += [proj(rng.normal(size=int(np.prod(res)))) for _ in range(starts)]
    states = []
    for x in candidates:
        if evals >= search_budget:
            break
        kx = op(x)
        states.append([x, kx, x @ kx, None, None])

    def step(st):
        x, kx, lam, p, kp = st
        r = kx - lam * x
        r = r - r.mean()
        if np.linalg.norm(r) <= 1e-11 * abs(lam):
            return st, True
        basis = [x, r] + ([p] if p is not None else [])
        kb = [kx, op(r)] + ([kp] if p is not None else [])
        B = np.stack(basis, axis=1)
        KB = np.stack(kb, axis=1)
        gram = B.T @ B
        gw, gv = np.linalg.eigh(gram)
        keep = gw > 1e-10 * gw[-1]
        T = gv[:, keep] / np.sqrt(gw[keep])
        q, kq = B @ T, KB @ T
        small = q.T @ kq
        small = 0.5 * (small + small.T)
        c = np.linalg.eigh(small)[1][:, 0]
        xn, kxn = q @ c, kq @ c
        nrm = np.linalg.norm(xn)
        xn, kxn = xn / nrm, kxn / nrm
        lam_n = float(xn @ kxn)
        if not lam_n < lam:
            return st, True
        pn, kpn = xn - (x @ xn) * x, kxn - (x @ xn) * kx
        pn_norm = np.linalg.norm(pn)
        if pn_norm > 1e-8:
            pn, kpn = pn / pn_norm, kpn / pn_norm
        else:
            pn, kpn = None, None
        return [xn, kxn, lam_n, pn, kpn], False

    warm = 10
    for st in states:
        for _ in range(warm):
            if evals >= search_budget:
                break
            new, done = step(st)
            st[:] = new
            if done:
                break
    best = min(range(len(states)), key=lambda i: (states[i][2], i))
    st = states[best]
    while evals < search_budget:
        new, done = step(st)
        st[:] = new
        if done:
            break
    lam = min(s[2] for s in states)
    x = min(states, key=lambda s: s[2])[0]
    exhausted = evals >= search_budget
    return PoincareResult(1.0 / (scale * lam), evals, exhausted, x.reshape(res))


# ---------------------------------------------------------------------------
# weighted Poincare and Sobolev


@dataclass(frozen=True)
class RatioResult:
    ratio: float
    left: float
    right: float
    degenerate: bool = False


def _ratio(left: float, right: float) -> RatioResult:
    if left == 0 and right == 0:
        return RatioResult(math.nan, left, right, True)
    return RatioResult(left / right if right > 0 else math.inf, left, right)


def weighted_poincare_check(
    mu: JumpMeasure, u: GridFunction, t: float = 0.0, psi: WeightFunction | None = None, scheme: str = "moment"
) -> RatioResult:
    """``int (u - u_psi)^2 psi`` against ``int int (u(x)-u(y))^2 sqrt(psi(x) psi(y)) mu_t``."""
    ev = mu.exponents
    expected = aniso_box(np.zeros(ev.d), 1.5, ev)
    if u.box.d != ev.d or not np.allclose(u.box.half_widths, expected.half_widths) or np.any(u.box.center):
        raise ValueError("u must be defined on M_{3/2}(0)")
    psi = psi or psi_weighted_poincare(ev)
    w = psi.on(u)
    v = u.values
    vpsi = np.sum(v * w) / np.sum(w)
    left = float(np.sum((v - vpsi) ** 2 * w)) * u.cell_volume
    right = assemble(mu, v.shape, u.spacing, t=t, scheme=scheme).form(v, v, s=np.sqrt(w))
    return _ratio(left, right)


def sobolev_check(
    ev: ExponentVector, u: GridFunction, r: float, lam: float, x0=None, scheme: str = "moment"
) -> RatioResult:
    """``||u||^2_{L^q(M_r)}``, ``q = 2 beta/(beta - 1)``, against the Sobolev right side on ``M_{lam r}``."""
    if ev.beta <= 1.0:
        raise ValueError(f"beta = {ev.beta} <= 1 gives no valid Sobolev exponent")
    if not (0 < r and 1 < lam):
        raise ValueError("need r > 0 and lambda > 1")
    x0 = np.zeros(ev.d) if x0 is None else np.asarray(x0, float)
    outer = aniso_box(x0, lam * r, ev)
    if not np.allclose(u.box.half_widths, outer.half_widths) or not np.allclose(u.box.center, x0):
        raise ValueError("u must be defined on M_{lambda r}(x0)")
    q = 2.0 * ev.beta / (ev.beta - 1.0)
    inner = restrict(u, aniso_box(x0, r, ev))
    left = (float(np.sum(np.abs(inner) ** q)) * u.cell_volume) ** (2.0 / q)
    energy = assemble(Axes(ev), u.resolution, u.spacing, scheme=scheme).form(u.values)
    right = energy + lambda_term(ev, r, lam) * u.norm(2) ** 2
    return _ratio(left, right)


# ---------------------------------------------------------------------------
# chain lemma


@dataclass(frozen=True)
class ChainResult:
    holds: bool
    ratio: float
    left: float
    right: float


def _tent_cdf(y, h):
    y = np.asarray(y, dtype=float)
    return np.where(
        y <= -h, 0.0, np.where(y <= 0, 0.5 * (y + h) ** 2, np.where(y < h, h * h - 0.5 * (h - y) ** 2, h * h))
    )


def _band_overlap(n: int, h: float, lo: float, hi: float) -> np.ndarray:
    """Measure of ``{(s, t) in cell_i x cell_j : lo <= |s - t| < hi}`` as a function of ``j - i``."""
    m = np.arange(-(n - 1), n, dtype=float) * h

    def inside(c):
        return _tent_cdf(c - m, h) - _tent_cdf(-c - m, h)

    return inside(hi) - inside(lo)


def _band_sum(u: GridFunction, k: int, lo: float, hi: float) -> float:
    n, h = u.resolution[k], u.spacing[k]
    ov = _band_overlap(n, h, lo, hi)
    idx = np.arange(n)
    mat = ov[idx[None, :] - idx[:, None] + n - 1]
    v = np.moveaxis(u.values, k, 0).reshape(n, -1)
    # sum_ij (v_i - v_j)^2 mat_ij summed over lines
    s = 2.0 * (np.sum(v * v * mat.sum(axis=1)[:, None]) - np.sum(v * (mat @ v)))
    return float(s) * u.cell_volume / h


def chain_lemma_check(ev: ExponentVector, u: GridFunction, k: int, a: float, N: int) -> ChainResult:
    """Band sums ``[a, 2a)`` against ``N^3`` times the band ``[a/N, 2a/N)``.

    Both sides are the exact integrals for the piecewise-constant ``u``.
    """
    if not a > 0 or N < 1:
        raise ValueError("need a > 0 and N >= 1")
    width = 2.0 * u.box.half_widths[k]
    if a >= width:
        raise ValueError("empty band: a exceeds the box width")
    left = _band_sum(u, k, a, 2 * a)
    right = _band_sum(u, k, a / N, 2 * a / N)
    bound = N ** 3 * right
    holds = left <= bound + SLACK * max(left, bound, 1e-300)
    return ChainResult(bool(holds), left / bound if bound > 0 else (0.0 if left == 0 else math.inf), left, right)


# ---------------------------------------------------------------------------
# log inequality


@dataclass(frozen=True)
class LogInequalityResult:
    holds: bool
    slack: float
    energy_term: float
    log_term: float
    psi_term: float


def log_inequality_check(mu: JumpMeasure, w: GridFunction, psi: WeightFunction, t: float = 0.0) -> LogInequalityResult:
    """``E_t(w, -psi^2/w) >= int int psi psi (log(w/psi)(y) - log(w/psi)(x))^2 mu_t - 3 E_t(psi, psi)``."""
    if np.any(w.values <= 0):
        raise ValueError("w must be positive")
    p = psi.on(w)
    if np.any(p < 0):
        raise ValueError("psi must be nonnegative")
    form = assemble(mu, w.resolution, w.spacing, t=t)
    left = form.form(w.values, -p * p / w.values)
    pos = p > 0
    g = np.where(pos, np.log(w.values / np.where(pos, p, 1.0)), 0.0)
    log_term = form.form(g, g, s=p)
    psi_term = 3.0 * form.form(p, p)
    rhs = log_term - psi_term
    slack = left - rhs
    scale = max(abs(left), abs(log_term), abs(psi_term), 1e-300)
    return LogInequalityResult(bool(slack >= -SLACK * scale), slack, left, log_term, psi_term)


# ---------------------------------------------------------------------------
# weak residual


@dataclass(frozen=True)
class ResidualResult:
    minimum: float
    residuals: np.ndarray
    times: np.ndarray


def weak_residual(
    u_frames,
    times,
    phi_frames,
    box: AnisoBox,
    mu: JumpMeasure,
    f: float | Callable | np.ndarray = 0.0,
    extension: str = "zero",
    scheme: str | None = None,
) -> ResidualResult:
    """Minimum over sampled times of ``int d_t u phi + E_t(u, phi) - int f phi``.

    ``u_frames`` and ``phi_frames`` have shape ``(T, *grid)`` on ``box``;
    ``extension`` is how ``u`` continues outside the box.  ``f`` is a
    constant, an array of frames, or a callable ``f(t, points)``.  The
    second-moment axis weights are used unless ``extension`` is ``"zero"``.
    """
    if scheme is None:
        scheme = "cell" if extension == "zero" else "moment"
    u = np.asarray(u_frames, dtype=float)
    phi = np.asarray(phi_frames, dtype=float)
    times = np.asarray(times, dtype=float)
    if u.shape != phi.shape or u.shape[0] != times.size:
        raise ValueError("frames and times do not match")
    if np.any(phi < 0):
        raise ValueError("phi must be nonnegative")
    for ax in range(1, phi.ndim):
        first = np.take(phi, 0, axis=ax)
        last = np.take(phi, -1, axis=ax)
        if np.any(first != 0) or np.any(last != 0):
            raise ValueError("phi support touches the box boundary")
    shape = u.shape[1:]
    spacing = 2.0 * box.half_widths / np.asarray(shape)
    vol = float(np.prod(spacing))
    centers = box.lower + (np.stack(np.meshgrid(*[np.arange(n) + 0.5 for n in shape], indexing="ij"), -1)) * spacing
    dudt = np.gradient(u, times, axis=0) if times.size > 1 else np.zeros_like(u)
    out = np.empty(times.size)
    for i, t in enumerate(times):
        form = assemble(mu, shape, spacing, extension=extension, t=float(t), scheme=scheme)
        if callable(f):
            fv = np.asarray(f(float(t), centers), dtype=float)
        elif np.ndim(f) == 0:
            fv = float(f)
        else:
            fv = np.asarray(f, dtype=float)[i]
        out[i] = float(np.sum(dudt[i] * phi[i])) * vol + form.form(u[i], phi[i]) - float(np.sum(fv * phi[i])) * vol
    return ResidualResult(float(out.min()), out, times)
