import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisoreg.energy import GridFunction, assemble
from anisoreg.geometry import ExponentVector, aniso_box
from anisoreg.kernels import Axes
from anisoreg.spectral import (
    SpectralField,
    apply_operator,
    axes_multiplier,
    evolve,
    evolve_forced,
    phi1,
    positivity_floor,
    sample_to_grid,
    stable_constant,
)

EV = ExponentVector((1.5, 0.8))
P = np.array([4.0, 6.0])


def _field(f, K=8, ev=EV, period=P):
    return SpectralField.from_function(f, period, K, ev)


def _smooth(x):
    return 1.0 + np.cos(2 * np.pi * x[..., 0] / P[0]) * np.sin(4 * np.pi * x[..., 1] / P[1]) + 0.3 * np.cos(2 * np.pi * x[..., 1] / P[1])


def _closed_stable_constant(a):
    # int_R (1 - cos s)|s|^(-1-a) ds = pi / (Gamma(1 + a) sin(pi a / 2))
    return (2 - a) * math.pi / (math.gamma(1 + a) * math.sin(math.pi * a / 2))


@pytest.mark.parametrize("a", [0.1, 0.5, 1.0, 1.5, 1.9, 1.999])
def test_stable_constant_closed_form(a):
    assert stable_constant(a) == pytest.approx(_closed_stable_constant(a), rel=1e-9)


def test_stable_constant_plug_in_and_range():
    assert stable_constant(1.0) == pytest.approx(math.pi, rel=1e-10)
    for bad in (0.0, 2.0, -1.0):
        with pytest.raises(ValueError):
            stable_constant(bad)


def test_phi1():
    assert phi1(0.0) == 1.0
    z = np.array([-5.0, -1e-3, 1e-10, 2.0])
    assert np.allclose(phi1(z), np.expm1(z) / z, rtol=1e-12)


def test_operator_annihilates_constants():
    u = _field(lambda x: np.full(x.shape[:-1], 2.5))
    assert np.allclose(apply_operator(u).grid_values(), 0.0, atol=1e-12)


def test_single_mode_eigenvalue():
    xi = 2 * np.pi / P[0] * 3
    u = _field(lambda x: np.cos(xi * x[..., 0]))
    lam = axes_multiplier(EV)[0] * xi**1.5
    assert np.allclose(apply_operator(u).grid_values(), -lam * u.grid_values(), atol=1e-11)


def test_evolve_single_mode():
    xi = 2 * np.pi / P[1] * 2
    u = _field(lambda x: np.cos(xi * x[..., 1]))
    lam = axes_multiplier(EV)[1] * xi**0.8
    pts = np.random.default_rng(0).uniform(-P / 2, P / 2, (50, 2))
    for t in (0.0, 0.1, 1.0):
        assert np.allclose(evolve(u, t).evaluate(pts), math.exp(-lam * t) * np.cos(xi * pts[:, 1]), atol=1e-12)


def test_multiplier_matches_energy():
    # E(u, u) = -<Lu, u> for the periodic axes form of a single cosine
    for a in (0.5, 1.0, 1.9):
        ev = ExponentVector((a,))
        box = aniso_box([0.0], 1.0, ev)
        period = 2 * box.half_widths[0]
        u = GridFunction.from_function(box, 512, lambda x: np.cos(2 * np.pi * x[..., 0] / period))
        energy = assemble(Axes(ev), (512,), u.spacing, extension="periodic", scheme="moment").form(u.values)
        m = axes_multiplier(ev)[0] * (2 * np.pi / period) ** a
        assert energy == pytest.approx(m * u.norm(2) ** 2, rel=1e-4)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2), st.floats(0, 2))
def test_semigroup_property(s, t):
    u = _field(_smooth)
    a = evolve(evolve(u, s), t).modes
    b = evolve(u, s + t).modes
    assert np.max(np.abs(a - b)) <= 1e-12


def test_mass_conserved():
    u = _field(_smooth)
    for t in (0.5, 5.0):
        assert evolve(u, t).grid_values().mean() == pytest.approx(u.grid_values().mean(), rel=1e-14)


def test_l2_norm_nonincreasing():
    u = _field(_smooth)
    norms = [np.sum(np.abs(evolve(u, t).modes) ** 2) for t in np.linspace(0, 2, 11)]
    assert all(b <= a for a, b in zip(norms, norms[1:]))


def test_maximum_principle():
    # 1 + cos(x1) cos(x2) has range [0, 2]; the semigroup kernel is a probability density
    u = _field(lambda x: 1 + np.cos(2 * np.pi * x[..., 0] / P[0]) * np.cos(2 * np.pi * x[..., 1] / P[1]))
    assert positivity_floor(u) == pytest.approx(0.0, abs=1e-12)
    for t in (0.01, 0.3, 3.0):
        v = evolve(u, t)
        assert positivity_floor(v) >= -1e-12
        assert np.max(v.grid_values()) <= 2 + 1e-12


def test_positivity_floor_region():
    u = _field(lambda x: np.cos(2 * np.pi * x[..., 0] / P[0]))
    assert positivity_floor(u) == pytest.approx(-1.0, abs=1e-12)
    ev = ExponentVector((1.5, 0.8))
    region = aniso_box([0.0, 0.0], 0.5, ev)
    w = region.half_widths[0]
    assert positivity_floor(u, region, 201) == pytest.approx(math.cos(2 * math.pi * w / P[0]), abs=1e-10)


def test_forced_constant_grows_linearly():
    u = _field(_smooth)
    one = _field(lambda x: np.ones(x.shape[:-1]))
    for t in (0.5, 2.0):
        v = evolve_forced(u, one, t, steps=7)
        assert v.grid_values().mean() == pytest.approx(u.grid_values().mean() + t, rel=1e-12)


def test_forced_without_source_is_free_evolution():
    u = _field(_smooth)
    assert np.allclose(evolve_forced(u, None, 0.7, 5).modes, evolve(u, 0.7).modes, atol=1e-14)


def test_forced_steady_state():
    xi = 2 * np.pi / P[0]
    f = _field(lambda x: np.cos(xi * x[..., 0]))
    lam = axes_multiplier(EV)[0] * xi**1.5
    zero = f * 0.0
    v = evolve_forced(zero, f, 40.0, steps=4)
    assert np.allclose(v.grid_values(), f.grid_values() / lam, atol=1e-12)
    # time-dependent source through a callable
    w = evolve_forced(zero, lambda s: f * math.exp(-s), 1.0, steps=2000)
    exact = (math.exp(-1.0) - math.exp(-lam)) / (lam - 1.0)
    assert np.allclose(w.grid_values(), exact * f.grid_values(), atol=1e-4)


def test_from_values_interpolates():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(8, 6))
    u = SpectralField.from_values(v, P, EV)
    assert np.allclose(u.grid_values(), v, atol=1e-13)
    nodes = [-p / 2 + np.arange(n) * p / n for p, n in zip(P, v.shape)]
    assert np.allclose(u.evaluate_tensor(nodes), v, atol=1e-12)


def test_sample_to_grid():
    box = aniso_box([0.0, 0.0], 1.0, EV)
    period = 2 * box.half_widths
    u = _field(_smooth, period=period)
    g = sample_to_grid(u, box, 12)
    assert g.extension == "periodic"
    assert np.allclose(g.values, u.evaluate(g.centers()), atol=1e-12)
    small = sample_to_grid(u, aniso_box([0.0, 0.0], 0.5, EV), 6)
    assert small.extension == "zero"
    with pytest.raises(ValueError):
        sample_to_grid(u, aniso_box([0.0, 0.0], 2.0, EV), 6)


def test_field_validation():
    with pytest.raises(ValueError):
        SpectralField(P, np.zeros((4,)), EV, [1.0, 1.0])
    with pytest.raises(ValueError):
        SpectralField(P, np.zeros((4, 4)), EV, [1.0, 0.0])
    with pytest.raises(ValueError):
        evolve(_field(_smooth), -1.0)
