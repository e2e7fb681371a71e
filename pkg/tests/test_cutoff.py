import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from anisoreg.cutoff import (
    build_cutoff,
    cutoff_energy_bound,
    cutoff_energy_density,
    cutoff_scale,
    cutoff_weighted_l2_bound,
)
from anisoreg.energy import GridFunction
from anisoreg.geometry import ExponentVector, aniso_box
from anisoreg.kernels import Axes, CoefficientField, Cusp, mass_outside_box

alphas = st.lists(st.floats(0.2, 1.99), min_size=1, max_size=3)


def test_parameter_ranges():
    ev = ExponentVector((1.0,))
    for r, lam in [(0.0, 1.5), (1.5, 1.5), (0.5, 1.0), (0.5, 2.5)]:
        with pytest.raises(ValueError):
            build_cutoff(0.0, r, lam, ev)


@settings(max_examples=40)
@given(alphas, st.floats(0.05, 1.0), st.floats(1.01, 2.0), st.integers(0, 2**32 - 1))
def test_cutoff_bullets(a, r, lam, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-1, 1, ev.d)
    tau = build_cutoff(x0, r, lam, ev)
    outer = aniso_box(x0, lam * r, ev)
    inner = aniso_box(x0, r, ev)
    y = x0 + rng.uniform(-1.5, 1.5, (4000, ev.d)) * outer.half_widths
    v = tau(y)
    assert np.all((0 <= v) & (v <= 1))
    assert np.all(v[inner.contains(y)] == 1.0)
    assert np.all(v[~outer.contains(y)] == 0.0)
    # slopes: per-coordinate Lipschitz bound with c = 1
    bounds = tau.slope_bounds()
    assert np.allclose(tau.slopes, bounds, rtol=1e-12)
    for k in range(ev.d):
        h = np.zeros(ev.d)
        h[k] = 1e-3 * outer.half_widths[k]
        # divide by the step actually taken after rounding y + h
        yh = y + h
        dq = np.abs(tau(yh) - tau(y)) / (yh[:, k] - y[:, k])
        assert np.all(dq <= bounds[k] * (1 + 1e-6))


def test_slope_plug_in():
    tau = build_cutoff(0.0, 0.5, 2.0, ExponentVector((1.0,)))
    assert tau.slopes[0] == pytest.approx(2.0)
    assert tau([0.75])[()] == pytest.approx(0.5)


def _axis_density_oracle(tau, x, alpha):
    # int (tau(x) - tau(x + h e_1))^2 (2 - alpha)|h|^(-1-alpha) dh, split at the ramp breakpoints
    f = lambda h: (tau([x]) - tau([x + h]))[()] ** 2 * (2 - alpha) * abs(h) ** (-1 - alpha)  # noqa: E731
    cuts = sorted({b - x for b in tau.breakpoints(0)} | {0.0})
    edges = [-np.inf] + cuts + [np.inf]
    return sum(integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0] for lo, hi in zip(edges[:-1], edges[1:]))


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("alpha", [0.6, 1.0, 1.5, 1.99])
@pytest.mark.parametrize("x", [0.0, 0.7, 1.2, 1.9, 2.5])
def test_axis_density_matches_quadrature(alpha, x):
    ev = ExponentVector((alpha,))
    tau = build_cutoff(0.0, 1.0, 2.0, ev)
    got = cutoff_energy_density(tau, Axes(ev), [x])
    assert got == pytest.approx(_axis_density_oracle(tau, x, alpha), rel=1e-7, abs=1e-12)


def test_energy_density_far_from_support_vanishes():
    ev = ExponentVector((1.0,))
    tau = build_cutoff(0.0, 1.0, 2.0, ev)
    assert cutoff_energy_density(tau, Axes(ev), [0.0]) > 0
    assert cutoff_energy_density(tau, Axes(ev), [1e6]) < 1e-5


def test_axes_bound_isotropic_plug_in():
    ev = ExponentVector((1.0, 1.0))
    tau = build_cutoff([0.0, 0.0], 1.0, 2.0, ev)
    assert cutoff_scale(tau) == pytest.approx(2.0)
    res = cutoff_energy_bound(tau, Axes(ev), points=17)
    assert np.isfinite(res.supremum) and res.c1 == pytest.approx(res.supremum / 2.0)


def test_energy_monotone_in_lambda():
    for a in [(1.0, 1.0), (1.99, 1.99), (0.7, 1.4)]:
        ev = ExponentVector(a)
        sups = [cutoff_energy_bound(build_cutoff([0, 0], 0.5, lam, ev), Axes(ev), points=9).supremum for lam in (1.25, 1.5, 2.0)]
        assert sups[0] >= sups[1] >= sups[2]


def test_c1_robust_near_two():
    c = {}
    for a in (1.0, 1.99):
        ev = ExponentVector((a, a))
        c[a] = cutoff_energy_bound(build_cutoff([0, 0], 1.0, 2.0, ev), Axes(ev), points=17).c1
    assert c[1.99] < 4 * c[1.0] and c[1.0] < 4 * c[1.99]


def test_cusp_energy_finite():
    ev = ExponentVector((1.5, 1.9))
    tau = build_cutoff([0, 0], 1.0, 1.5, ev)
    res = cutoff_energy_bound(tau, Cusp(1.5, 1.9), points=5)
    assert np.isfinite(res.c1) and res.c1 > 0


def test_coefficient_scales_energy():
    ev = ExponentVector((1.2, 0.9))
    tau = build_cutoff([0, 0], 0.8, 1.5, ev)
    full = cutoff_energy_density(tau, Axes(ev), [0.3, 0.9])
    half = cutoff_energy_density(tau, Axes(ev, CoefficientField.constant(0.5)), [0.3, 0.9])
    assert half == pytest.approx(0.5 * full)


def test_weighted_l2_zero_function():
    ev = ExponentVector((1.0, 1.0))
    tau = build_cutoff([0, 0], 0.5, 2.0, ev)
    u = GridFunction.from_function(tau.support, 8, lambda x: 0 * x[..., 0])
    assert cutoff_weighted_l2_bound(tau, Axes(ev), u) == 0.0


def test_weighted_l2_constant_reduces_to_tail_mass():
    ev = ExponentVector((1.0, 1.5))
    tau = build_cutoff([0, 0], 0.5, 2.0, ev)
    mu = Axes(ev)
    u = GridFunction.from_function(tau.support, 12, lambda x: np.ones(x.shape[:-1]))
    pts = u.centers().reshape(-1, 2)
    oracle = sum(tau(p) ** 2 * mass_outside_box(mu, p, tau.support) for p in pts) * u.cell_volume
    ratio = cutoff_weighted_l2_bound(tau, mu, u)
    assert ratio == pytest.approx(oracle / (cutoff_scale(tau) * u.norm(2) ** 2), rel=1e-10)


def test_weighted_l2_refinement():
    ev = ExponentVector((1.0, 1.0))
    tau = build_cutoff([0, 0], 0.5, 2.0, ev)
    f = lambda x: np.cos(x[..., 0]) + x[..., 1]  # noqa: E731
    r = [cutoff_weighted_l2_bound(tau, Axes(ev), GridFunction.from_function(tau.support, n, f)) for n in (16, 32)]
    assert 0.5 < r[1] / r[0] < 2


def test_weighted_l2_rejects_wrong_box():
    ev = ExponentVector((1.0, 1.0))
    tau = build_cutoff([0, 0], 0.5, 2.0, ev)
    u = GridFunction.from_function(aniso_box([0, 0], 1.5, ev), 8, lambda x: x[..., 0])
    with pytest.raises(ValueError):
        cutoff_weighted_l2_bound(tau, Axes(ev), u)
