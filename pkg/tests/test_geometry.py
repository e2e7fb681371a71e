import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anisoreg.geometry import (
    ExponentVector,
    ScalingMap,
    aniso_box,
    aniso_metric,
    rho_hat,
    scaling_forward,
    scaling_inverse,
    slab,
    standard_cylinders,
)

alpha = st.floats(0.05, 1.99)
alphas = st.lists(alpha, min_size=1, max_size=3)


def test_exponent_vector_derived_quantities():
    ev = ExponentVector((1.0, 0.5, 1.5))
    assert ev.alpha_max == 1.5
    assert ev.alpha0 == 0.5
    assert ev.beta == pytest.approx(1 + 2 + 2 / 3)
    assert ev.kappa == pytest.approx(1 + 1 / ev.beta)


@pytest.mark.parametrize("bad", [(0.0,), (2.0,), (1.0, -0.5), ()])
def test_exponent_vector_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        ExponentVector(bad)


def test_exponent_vector_rejects_alpha_below_floor():
    with pytest.raises(ValueError):
        ExponentVector((0.5, 1.0), alpha0=0.8)


@given(alphas)
def test_beta_and_kappa_bounds(a):
    ev = ExponentVector(tuple(a))
    d = ev.d
    assert d / 2 <= ev.beta <= d / ev.alpha0 * (1 + 1e-12)
    assert 1 < ev.kappa <= 1 + 2 / d + 1e-12


def test_box_plug_in_exact_ratio():
    # (1, 2) is outside the admissible range; the same half-widths come from (0.9, 1.8)
    box = aniso_box(0.0, 0.5, ExponentVector((0.9, 1.8)))
    assert box.lower == pytest.approx([-0.25, -0.5])
    assert box.upper == pytest.approx([0.25, 0.5])


@given(alphas)
def test_unit_radius_gives_unit_cube(a):
    ev = ExponentVector(tuple(a))
    box = aniso_box(np.zeros(ev.d), 1.0, ev)
    assert np.all(box.half_widths == 1.0)
    assert box.volume == 2.0**ev.d


def test_isotropic_box():
    box = aniso_box(0.0, 2.0, ExponentVector((1.0, 1.0)))
    assert np.all(box.half_widths == 2.0)


@given(alphas, st.floats(0.01, 5.0))
def test_volume_is_product_of_sides(a, r):
    ev = ExponentVector(tuple(a))
    box = aniso_box(np.zeros(ev.d), r, ev)
    assert box.volume == pytest.approx(np.prod(2 * r ** (ev.alpha_max / ev.array)), rel=1e-12)


def test_box_rejects_nonpositive_radius():
    ev = ExponentVector((1.0,))
    for r in (0.0, -1.0):
        with pytest.raises(ValueError):
            aniso_box(0.0, r, ev)


def test_slab_threshold_plug_in():
    s = slab(0.0, 0.25, 0, ExponentVector((0.9, 1.8)))
    assert s.threshold == pytest.approx(1 / 16)


def test_slab_axis_out_of_range():
    ev = ExponentVector((1.0, 1.0))
    with pytest.raises(IndexError):
        slab(0.0, 1.0, 2, ev)


def test_boundary_points_are_outside():
    ev = ExponentVector((1.0, 1.0))
    box = aniso_box(0.0, 1.0, ev)
    assert not box.contains([1.0, 0.0])
    assert not slab(0.0, 1.0, 0, ev).contains([1.0, 0.0])
    assert box.contains([0.999, 0.0])


@settings(max_examples=30)
@given(alphas, st.floats(0.05, 3.0), st.integers(0, 2**32 - 1))
def test_box_is_intersection_of_slabs(a, r, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-1, 1, ev.d)
    y = x0 + rng.uniform(-2, 2, (10_000, ev.d)) * ev.half_widths(r)
    box = aniso_box(x0, r, ev)
    inter = np.ones(len(y), bool)
    for k in range(ev.d):
        inter &= slab(x0, r, k, ev).contains(y)
    assert np.array_equal(box.contains(y), inter)


@settings(max_examples=30)
@given(alphas, st.floats(0.05, 3.0), st.integers(0, 2**32 - 1))
def test_box_membership_matches_metric(a, r, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(-1, 1, ev.d)
    y = x0 + rng.uniform(-2, 2, (2000, ev.d)) * ev.half_widths(r)
    dist = aniso_metric(x0, y, ev)
    inside = aniso_box(x0, r, ev).contains(y)
    # exclude points within round-off of the boundary
    clear = np.abs(dist - r) > 1e-9 * r
    assert np.array_equal(inside[clear], (dist < r)[clear])


@given(alphas, st.floats(0.05, 2.0), st.floats(1.0, 3.0), st.integers(0, 2**32 - 1))
def test_box_monotone_in_radius(a, r, factor, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    y = rng.uniform(-3, 3, (500, ev.d))
    small = aniso_box(np.zeros(ev.d), r, ev).contains(y)
    big = aniso_box(np.zeros(ev.d), r * factor, ev).contains(y)
    assert np.all(big[small])


def test_metric_examples():
    ev = ExponentVector((0.9, 1.8))
    assert aniso_metric([1.0, 0.0], [0.0, 0.0], ev) == pytest.approx(1.0)
    assert aniso_metric([0.3, -2.0], [0.3, -2.0], ev) == 0.0
    # |x_1|^(alpha_1/alpha_max) = 4^(1/2)
    assert aniso_metric([4.0, 0.0], [0.0, 0.0], ev) == pytest.approx(2.0)


@settings(max_examples=20)
@given(alphas, st.integers(0, 2**32 - 1))
def test_metric_axioms(a, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    x, y, z = (rng.uniform(-5, 5, (100_000, ev.d)) for _ in range(3))
    dxy, dyx = aniso_metric(x, y, ev), aniso_metric(y, x, ev)
    assert np.array_equal(dxy, dyx)
    assert np.all(dxy > 0)
    assert np.all(aniso_metric(x, x, ev) == 0)
    # exponents alpha_k/alpha_max <= 1 make each term subadditive
    assert np.all(aniso_metric(x, z, ev) <= dxy + aniso_metric(y, z, ev) + 1e-12 * (1 + dxy))


def test_rho_hat_examples():
    ev = ExponentVector((1.0, 1.5))
    assert rho_hat(0.0, [0.0, 0.0], ev) == 0.0
    assert rho_hat(-1.0, [0.0, 0.0], ev) == pytest.approx(0.5)
    assert rho_hat(1.0, [0.0, 0.0], ev) == math.inf
    assert rho_hat(-2.0, [0.0, 0.0], ev) == math.inf
    # spatial part (1/3) sup |x_k|^(alpha_k/alpha_max)
    assert rho_hat(-1e-9, [0.9, 0.0], ev) == pytest.approx(0.9 ** (1 / 1.5) / 3)


def test_scaling_plug_in():
    ev = ExponentVector((1.0,))
    m = ScalingMap(0.0, np.zeros(1), 2.0, ev)
    t, x = scaling_forward(m, 1.0, [1.0])
    assert t == 2.0 and x == pytest.approx([2.0])


@given(alphas, st.integers(0, 2**32 - 1))
def test_unit_scaling_is_identity(a, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    t = rng.uniform(-2, 2, 1000)
    x = rng.uniform(-5, 5, (1000, ev.d))
    t2, x2 = scaling_forward(ScalingMap(0.0, np.zeros(ev.d), 1.0, ev), t, x)
    assert np.array_equal(t2, t) and np.array_equal(x2, x)


@given(alphas, st.floats(0.01, 10.0), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_scaling_round_trip(a, r, tau, seed):
    ev = ExponentVector(tuple(a))
    rng = np.random.default_rng(seed)
    m = ScalingMap(tau, rng.uniform(-3, 3, ev.d), r, ev)
    t = rng.uniform(-2, 2, 100)
    x = rng.uniform(-5, 5, (100, ev.d))
    t2, x2 = scaling_inverse(m, *scaling_forward(m, t, x))
    assert np.allclose(t2, t, rtol=1e-12, atol=1e-12 * (1 + abs(tau) / r**ev.alpha_max))
    assert np.allclose(x2, x, rtol=1e-12, atol=1e-11 * (1 + np.max(np.abs(m.xi) / ev.half_widths(r))))


@given(alphas, st.floats(0.05, 4.0), st.floats(-3, 3))
def test_scaling_maps_unit_cylinder_corners(a, r, tau):
    ev = ExponentVector(tuple(a))
    xi = np.linspace(-1, 1, ev.d)
    m = ScalingMap(tau, xi, r, ev)
    q1 = standard_cylinders(ev, 1.0)["Q+"]
    qr_lo = tau
    qr_hi = tau + r**ev.alpha_max
    t_lo, x_lo = scaling_forward(m, q1.t_lo, q1.box.lower)
    t_hi, x_hi = scaling_forward(m, q1.t_hi, q1.box.upper)
    box = aniso_box(xi, r, ev)
    assert t_lo == pytest.approx(qr_lo) and t_hi == pytest.approx(qr_hi)
    assert np.allclose(x_lo, box.lower) and np.allclose(x_hi, box.upper)


def test_standard_cylinders_alpha_max_one():
    ev = ExponentVector((1.0, 0.5))
    cyl = standard_cylinders(ev)
    up, um = cyl["U+"], cyl["U-"]
    assert (up.t_lo, up.t_hi) == (0.5, 1.0)
    assert (um.t_lo, um.t_hi) == (-1.0, -0.5)
    assert up.box.radius == 0.5
    assert (cyl["D-"].t_lo, cyl["D-"].t_hi) == (-2.0, -1.5)
    assert (cyl["D+"].t_lo, cyl["D+"].t_hi) == (-0.5, 0.0)


@given(alphas, st.floats(0.05, 1.0))
def test_standard_cylinder_definitions(a, r):
    ev = ExponentVector(tuple(a))
    am = ev.alpha_max
    cyl = standard_cylinders(ev, r, t0=0.3, x0=0.1)
    assert cyl["Dhat"].t_lo == pytest.approx(0.3 - 2 * r**am)
    assert cyl["Dhat"].t_hi == 0.3
    assert cyl["Dhat"].box.radius == pytest.approx(3 * r)
    assert np.allclose(cyl["Dhat"].box.center, 0.1)
    assert cyl["D"].t_lo == pytest.approx(-2 * r**am)
    assert cyl["D"].box.radius == pytest.approx(2 * r)
    assert cyl["U+"].t_lo == pytest.approx(1 - 2**-am)
    assert cyl["U-"].t_hi == pytest.approx(-1 + 2**-am)


def test_q_cylinders_disjoint():
    ev = ExponentVector((1.0, 1.5))
    cyl = standard_cylinders(ev)
    qp, qm = cyl["Q+"], cyl["Q-"]
    assert qm.t_hi == qp.t_lo == 0.0
    rng = np.random.default_rng(1)
    t = rng.uniform(-1.5, 1.5, 10_000)
    x = rng.uniform(-1, 1, (10_000, 2))
    assert not np.any(qp.contains(t, x) & qm.contains(t, x))
    assert not np.any(qp.contains(np.zeros(10), x[:10]) | qm.contains(np.zeros(10), x[:10]))


@pytest.mark.parametrize("a", [(1.0, 1.0), (1.0, 0.6), (1.5, 1.9), (1.99, 1.2)])
def test_dhat_matches_rho_hat_ball(a):
    # the equivalence needs alpha_max >= 1 (two-step time scaling)
    ev = ExponentVector(a)
    rng = np.random.default_rng(2)
    for r in (1.0, 0.5, 1 / 6):
        dh = standard_cylinders(ev, r)["Dhat"]
        t = rng.uniform(dh.t_lo, dh.t_hi, 10_000)
        x = rng.uniform(-1, 1, (10_000, ev.d)) * dh.box.half_widths * 1.3
        in_d = dh.contains(t, x)
        in_rho = rho_hat(t, x, ev) < r
        dist = np.maximum(0.5 * (-t) ** (1 / ev.alpha_max), aniso_metric(x, 0.0, ev) / 3)
        clear = np.abs(dist - r) > 1e-12
        assert np.array_equal(in_d[clear], in_rho[clear])
