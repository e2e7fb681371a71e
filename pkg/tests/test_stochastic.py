import math

import numpy as np
import pytest
from scipy import stats

from anisoreg.geometry import ExponentVector, standard_cylinders
from anisoreg.spectral import SpectralField, axes_multiplier, evolve
from anisoreg.stochastic import (
    BLOCK,
    EnsembleEstimate,
    PathEnsemble,
    StableSampler,
    estimate_solution,
    harnack_ratio,
    holder_quotient,
    oscillation_decay,
    sample_increment,
    spectral_accessor,
)

P_VALUE = 1e-3


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5, 1.9])
def test_sampler_matches_reference_law(alpha):
    s = StableSampler(alpha, scale=0.7, seed=3)
    x = s.draw(0.4, 2000)
    sigma = (0.7 * 0.4) ** (1 / alpha)
    assert stats.kstest(x, stats.levy_stable(alpha, 0.0, scale=sigma).cdf).pvalue > P_VALUE


def test_cauchy_reference():
    x = StableSampler(1.0).draw(1.0, 20_000)
    assert stats.kstest(x, stats.cauchy.cdf).pvalue > P_VALUE
    # median zero: the count of positive draws is binomial(n, 1/2)
    assert abs(np.mean(x > 0) - 0.5) < 4 * 0.5 / math.sqrt(x.size)


@pytest.mark.parametrize("alpha,xi", [(1.0, 1.0), (0.5, 2.0), (1.5, 0.8), (1.9, 1.3)])
def test_characteristic_function(alpha, xi):
    n = 200_000
    x = StableSampler(alpha, scale=1.2, seed=11).draw(0.5, n)
    c = np.cos(xi * x)
    exact = math.exp(-0.5 * 1.2 * xi**alpha)
    assert abs(c.mean() - exact) < 4 * c.std() / math.sqrt(n)


def test_additivity():
    s = StableSampler(1.3, seed=5)
    a = s.draw(0.3, 5000, block=0) + s.draw(0.7, 5000, block=1)
    b = s.draw(1.0, 5000, block=2)
    assert stats.ks_2samp(a, b).pvalue > P_VALUE


def test_self_similarity_exact():
    s = StableSampler(1.7, scale=2.0, seed=1)
    base = s.draw(1.0, 100)
    for dt in (0.01, 0.5, 3.0):
        assert np.allclose(s.draw(dt, 100), dt ** (1 / 1.7) * base, rtol=1e-13)


def test_streams_reproducible_and_independent():
    s = StableSampler(1.2, seed=9)
    assert np.array_equal(s.draw(1.0, 50, block=4), s.draw(1.0, 50, block=4))
    a = s.draw(1.0, 20_000, block=0)
    b = s.draw(1.0, 20_000, block=1)
    c = StableSampler(1.2, seed=9, component=1).draw(1.0, 20_000, block=0)
    for other in (b, c):
        rho = stats.spearmanr(a, other).statistic
        assert abs(rho) < 4 / math.sqrt(a.size)


def test_sampler_validation_and_scalar_increment():
    for bad in (0.0, 2.0):
        with pytest.raises(ValueError):
            StableSampler(bad)
    with pytest.raises(ValueError):
        StableSampler(1.0, scale=0.0)
    with pytest.raises(ValueError):
        StableSampler(1.0).draw(0.0, 3)
    assert isinstance(sample_increment(StableSampler(1.0), 0.5), float)


def test_paths_end_matches_marginal():
    ev = ExponentVector((1.4, 0.9))
    ens = PathEnsemble.build(ev, BLOCK, T=1.0, seed=2)
    end = ens.paths([0.2, 0.5, 1.0], block=0)[-1]
    direct = ens.marginal(1.0, block=1)
    for k in range(2):
        assert stats.ks_2samp(end[:, k], direct[:, k]).pvalue > P_VALUE
    with pytest.raises(ValueError):
        ens.paths([0.5, 0.2], block=0)


def test_ensemble_blocks():
    ens = PathEnsemble.build(ExponentVector((1.0,)), 2 * BLOCK + 5)
    assert ens.blocks == [(0, BLOCK), (1, BLOCK), (2, 5)]


def test_estimate_of_constant_and_at_time_zero():
    ev = ExponentVector((1.2, 0.8))
    pts = np.array([[0.0, 0.0], [1.0, -2.0]])
    one = estimate_solution(lambda x: np.ones(x.shape[:-1]), ev, 0.5, pts, 5000)
    assert np.array_equal(one.estimate, [1.0, 1.0]) and np.all(one.stderr == 0)
    g = lambda x: np.sin(x[..., 0]) + x[..., 1]  # noqa: E731
    zero = estimate_solution(g, ev, 0.0, pts, 10)
    assert np.array_equal(zero.estimate, g(pts))


def test_estimate_cosine_decay():
    ev = ExponentVector((1.5, 0.8))
    xi, t = 1.3, 0.4
    pts = np.array([[0.0, 0.0], [0.5, 1.0], [2.0, -1.0]])
    est = estimate_solution(lambda x: np.cos(xi * x[..., 0]), ev, t, pts, 50_000, seed=4)
    exact = np.cos(xi * pts[:, 0]) * math.exp(-t * axes_multiplier(ev)[0] * xi**1.5)
    assert np.all(np.abs(est.estimate - exact) < 4 * est.stderr)


def test_estimate_worker_invariant():
    ev = ExponentVector((1.1, 1.6))
    g = lambda x: np.exp(-np.sum(x**2, axis=-1))  # noqa: E731
    pts = np.random.default_rng(0).normal(size=(7, 2))
    runs = [estimate_solution(g, ev, 0.3, pts, 3 * BLOCK + 17, seed=8, workers=w) for w in (1, 4, 8)]
    for r in runs[1:]:
        assert np.array_equal(r.estimate, runs[0].estimate) and np.array_equal(r.stderr, runs[0].stderr)


def test_estimate_csv_round_trip():
    ev = ExponentVector((1.1, 1.6))
    est = estimate_solution(lambda x: np.cos(x[..., 0]), ev, 0.3, [[0.1, 0.2], [1.0, 2.0]], 1000, seed=1)
    back = EnsembleEstimate.from_csv(est.to_csv())
    assert np.array_equal(back.estimate, est.estimate) and np.array_equal(back.points, est.points)
    assert (back.t, back.N, back.seed) == (est.t, est.N, est.seed)


def _field(ev, f, period=8.0, K=8):
    return SpectralField.from_function(f, period, K, ev)


def test_spectral_accessor_pairs_and_forcing():
    ev = ExponentVector((1.2, 0.9))
    u0 = _field(ev, lambda x: np.cos(2 * np.pi * x[..., 0] / 8) + np.sin(2 * np.pi * x[..., 1] / 8))
    u = spectral_accessor(u0, t0=-1.0)
    rng = np.random.default_rng(1)
    ts = rng.uniform(-1, 1, 30)
    xs = rng.uniform(-4, 4, (30, 2))
    bulk = u.pairs(ts, xs)
    single = [u(t, x[None])[0] for t, x in zip(ts, xs)]
    assert np.allclose(bulk, single, atol=1e-12)
    assert np.allclose(u(0.5, xs), evolve(u0, 1.5).evaluate(xs), atol=1e-12)
    one = _field(ev, lambda x: np.ones(x.shape[:-1]))
    forced = spectral_accessor(0.0 * one, forcing=one)
    assert np.allclose(forced(0.7, xs), 0.7, atol=1e-12)
    with pytest.raises(ValueError):
        u(-2.0, xs)


def test_harnack_constant():
    ev = ExponentVector((1.5, 0.8))
    cyl = standard_cylinders(ev)["U-"]
    volume = cyl.box.volume * cyl.duration
    res = harnack_ratio(lambda t, x: np.ones(x.shape[:-1]), 0.5, ev)
    assert res.l1_early == pytest.approx(volume, rel=1e-12)
    assert res.inf_late == 1.0
    assert res.ratio == pytest.approx(volume / 1.5, rel=1e-12)


def test_harnack_scale_invariant_without_source():
    ev = ExponentVector((1.5, 0.8))
    u = lambda t, x: 1.5 + np.cos(x[..., 0]) * np.exp(-t)  # noqa: E731
    a = harnack_ratio(u, 0.0, ev)
    b = harnack_ratio(lambda t, x: 2 * u(t, x), 0.0, ev)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-12)


def test_harnack_rejects_negative():
    ev = ExponentVector((1.0, 1.0))
    with pytest.raises(ValueError):
        harnack_ratio(lambda t, x: x[..., 0], 0.0, ev)
    with pytest.raises(ValueError):
        harnack_ratio(lambda t, x: np.ones(x.shape[:-1]), -1.0, ev)


def test_oscillation_of_constant():
    ev = ExponentVector((1.5, 0.8))
    res = oscillation_decay(lambda t, x: np.full(x.shape[:-1], 2.0), ev, nu_max=2)
    assert np.all(res.osc == 0) and res.nonincreasing and res.gamma == math.inf


def test_oscillation_of_linear_function():
    # osc of x_1 over the cylinder of radius r is proportional to r^(alpha_max/alpha_1)
    ev = ExponentVector((1.5, 0.8))
    res = oscillation_decay(lambda t, x: x[..., 0], ev, nu_max=3)
    assert res.nonincreasing and res.unresolved == ()
    assert res.gamma == pytest.approx(ev.powers[0], rel=1e-9)


def test_holder_quotient_constant():
    ev = ExponentVector((1.5, 0.8))
    q = standard_cylinders(ev)["Q-"]
    res = holder_quotient(lambda t, x: np.full(x.shape[:-1], 3.0), ev, q, 0.5, sample_pairs=200)
    assert res.quotient == 0.0 and res.eta == math.inf and res.sup_norm == 3.0


def test_holder_quotient_linear():
    ev = ExponentVector((1.5, 0.8))
    q = standard_cylinders(ev)["Q-"]
    res = holder_quotient(lambda t, x: x[..., 0], ev, q, 1.0, sample_pairs=2000, seed=3)
    assert 0.9 < res.quotient <= 1.0 + 1e-12
