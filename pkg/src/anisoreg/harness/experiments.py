"""Experiment registry.

Each experiment is a function ``run(cfg, report, ctx)`` that fills an
:class:`ExperimentReport` with measured values, tables, figures and
pass/fail checks.  Defaults live on the :class:`ExperimentSpec`; a config
only overrides what it names.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from ..cutoff import build_cutoff, cutoff_energy_bound, cutoff_weighted_l2_bound
from ..energy.forms import comparability_ratio, random_test_functions
from ..energy.functional import log_inequality_check, poincare_constant, sobolev_check, weighted_poincare_check
from ..energy.grid import GridFunction, psi_weighted_poincare
from ..geometry import ExponentVector, aniso_box, standard_cylinders
from ..inequalities import (
    BGParams,
    MoserScheduleNeg,
    MoserSchedulePos,
    bombieri_giusti_check,
    check_guelle1,
    check_guelle2,
    cylinder_family,
    guelle_sweep,
    moser_exponent_sums,
    moser_product_bound,
)
from ..kernels import Axes, DoubleExponent, cusp_params, make_measure, mu_axes_tail_exact, tail_mass
from ..spectral import SpectralField, evolve, positivity_floor
from ..stochastic import estimate_solution, harnack_ratio, holder_quotient, oscillation_decay, spectral_accessor
from . import figures
from .config import ConfigError, ExperimentConfig
from .report import ExperimentReport


@dataclass
class Context:
    workers: int = 1

    def map(self, fn: Callable, items) -> list:
        """Ordered parallel map; results do not depend on the worker count."""
        items = list(items)
        if self.workers <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.workers) as ex:
            return list(ex.map(fn, items))


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    summary: str
    run: Callable
    exponents: tuple | None = None
    measure: dict | None = None
    resolution: tuple | None = None
    samples: int | None = None
    tolerances: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    dims: tuple = (1, 2, 3)
    min_samples: int = 1

    def validate(self, cfg: ExperimentConfig) -> None:
        for i, a in enumerate(cfg.exponents or ()):
            if len(a) not in self.dims:
                raise ConfigError(f"exponents[{i}]", f"dimension {len(a)} not supported here; use one of {list(self.dims)}")
        if cfg.measure is not None:
            mu = _build_measure(cfg.measure)
            if mu.d not in self.dims:
                raise ConfigError("measure", f"dimension {mu.d} not supported here")
        if cfg.samples is not None and cfg.samples < self.min_samples:
            raise ConfigError("samples", f"need at least {self.min_samples}")


REGISTRY: dict = {}


def experiment(name: str, summary: str, **defaults):
    def wrap(fn):
        REGISTRY[name] = ExperimentSpec(name, summary, fn, **defaults)
        return fn

    return wrap


def _build_measure(measure: dict):
    return make_measure(measure["family"], **dict(measure["params"]))


def _family_measure(family: str, alphas: tuple):
    if family == "product-stable":
        return make_measure(family, alpha=alphas[0], beta=alphas[1])
    if family == "double-exponent":
        return make_measure(family, alphas=alphas, betas=alphas)
    return make_measure(family, alphas=alphas)


def _measures(cfg: ExperimentConfig, family: str) -> list:
    """The configured measure, or one measure of ``family`` per exponent vector."""
    if cfg.measure is not None:
        mu = _build_measure(cfg.measure)
        return [(_label(mu.exponents.alphas), mu)]
    return [(_label(a), _family_measure(family, a)) for a in cfg.exponents]


def _label(alphas) -> str:
    return "(" + ",".join(f"{a:g}" for a in alphas) + ")"


def _spread(values) -> float:
    v = np.asarray(values, dtype=float)
    return float(v.max() / v.min()) if v.size and v.min() > 0 else math.inf


def _moved(a: float, b: float) -> float:
    """Factor by which a positive quantity moved."""
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        return math.inf
    return max(a / b, b / a)


# ---------------------------------------------------------------------------
# tails


@experiment(
    "tail-check",
    "exact tail mass of the axes measure against quadrature",
    exponents=((0.5,), (1.0,), (1.9,), (1.0, 1.0), (0.5, 1.5), (1.9, 0.7), (1.0, 1.0, 1.0), (0.4, 1.2, 1.8), (1.95, 1.5, 0.8)),
    tolerances={"rel": 1e-6},
    params={"radii": [0.25, 1.0, 2.0]},
)
def run_tail_check(cfg, rep, ctx):
    tab = rep.table("tails", ["alphas", "rho", "quadrature", "exact", "rel_error"])
    tol = cfg.tolerances["rel"]
    for a in cfg.exponents:
        ev = ExponentVector(a)
        worst = 0.0
        for rho in cfg.params["radii"]:
            if not rho > 0:
                raise ConfigError("params.radii", "radii must be positive")
            tm = tail_mass(Axes(ev), np.zeros(ev.d), rho)
            exact = mu_axes_tail_exact(ev, rho)
            rel = abs(tm.mass - exact) / exact
            worst = max(worst, rel)
            tab.add(list(a), rho, tm.mass, exact, rel)
        rep.check(f"tail-{_label(a)}", worst <= tol, worst, tol)
    ev = ExponentVector((1.0, 1.0))
    value = tail_mass(Axes(ev), np.zeros(2), 1.0).mass
    rep.measured["axes_(1,1)_rho1"] = value
    rep.check("exact-value-4", abs(value - 4.0) <= tol * 4.0 and mu_axes_tail_exact(ev, 1.0) == 4.0, value, 4.0)
    if cfg.measure is not None:
        mu = _build_measure(cfg.measure)
        rep.measured["measure_tail_ratio"] = {
            f"{rho:g}": tail_mass(mu, np.zeros(mu.d), rho).ratio for rho in cfg.params["radii"]
        }


# ---------------------------------------------------------------------------
# comparability


@experiment(
    "comparability",
    "energy ratio of the cusp measure to the axes measure under grid refinement",
    exponents=((1.0, 1.0), (1.5, 1.9), (0.5, 1.5)),
    resolution=(64, 128),
    samples=100,
    tolerances={"move": 2.0, "exact": 1e-12},
    params={"double_exponent_check": True},
    dims=(2,),
)
def run_comparability(cfg, rep, ctx):
    tab = rep.table("ratios", ["measure", "resolution", "min_ratio", "max_ratio", "skipped"])
    lo_res, hi_res = cfg.resolution[0], cfg.resolution[-1]
    measures = _measures(cfg, "cusp")

    def one(item):
        label, mu = item
        box = aniso_box(np.zeros(mu.d), 1.0, mu.exponents)
        return [comparability_ratio(mu, box, cfg.samples, n, seed=cfg.seed) for n in cfg.resolution]

    results = ctx.map(one, measures)
    for (label, mu), res in zip(measures, results):
        for n, r in zip(cfg.resolution, res):
            tab.add(label, n, r.min_ratio, r.max_ratio, r.skipped)
        first, last = res[0], res[-1]
        finite = all(0 < r.min_ratio <= r.max_ratio < math.inf for r in res)
        rep.check(f"finite-{label}", finite, [first.min_ratio, first.max_ratio])
        move = max(_moved(first.min_ratio, last.min_ratio), _moved(first.max_ratio, last.max_ratio))
        rep.measured[f"interval_{label}_{lo_res}"] = [first.min_ratio, first.max_ratio]
        rep.measured[f"interval_{label}_{hi_res}"] = [last.min_ratio, last.max_ratio]
        rep.check(f"refinement-{label}", move < cfg.tolerances["move"], move, cfg.tolerances["move"])
    if cfg.params["double_exponent_check"]:
        # equal exponent pairs double every axis weight
        a = cfg.exponents[0]
        mu = DoubleExponent(tuple(a), tuple(a))
        r = comparability_ratio(mu, aniso_box(np.zeros(len(a)), 1.0, mu.exponents), 10, lo_res, seed=cfg.seed)
        err = max(abs(r.min_ratio - 2.0), abs(r.max_ratio - 2.0)) / 2.0
        rep.check("double-exponent-ratio-2", err <= cfg.tolerances["exact"], err, cfg.tolerances["exact"])


# ---------------------------------------------------------------------------
# Poincare and Sobolev


@experiment(
    "poincare",
    "empirical Poincare constants as the exponents approach 2",
    exponents=((1.0, 1.0), (1.5, 1.5), (1.9, 1.9), (1.99, 1.99)),
    resolution=(32,),
    samples=2000,
    tolerances={"spread": 10.0},
    params={"starts": 20},
    dims=(1, 2),
)
def run_poincare(cfg, rep, ctx):
    tab = rep.table("constants", ["alphas", "resolution", "constant", "evaluations", "exhausted"])
    for n in cfg.resolution:

        def one(a, n=n):
            ev = ExponentVector(a)
            box = aniso_box(np.zeros(ev.d), 1.0, ev)
            return poincare_constant(ev, box, cfg.samples, n, cfg.params["starts"], cfg.seed)

        results = ctx.map(one, cfg.exponents)
        consts = []
        for a, p in zip(cfg.exponents, results):
            tab.add(list(a), n, p.constant, p.evaluations, p.exhausted)
            rep.measured[f"constant_{_label(a)}_{n}"] = p.constant
            consts.append(p.constant)
        ok = all(0 < c < math.inf for c in consts)
        spread = _spread(consts)
        rep.check(f"spread-{n}", ok and spread < cfg.tolerances["spread"], spread, cfg.tolerances["spread"])


@experiment(
    "sobolev",
    "Sobolev and weighted Poincare ratios under grid refinement",
    exponents=((1.0, 1.0), (1.5, 1.5), (0.8, 1.6)),
    resolution=(32, 64),
    samples=20,
    tolerances={"move": 2.0},
    params={"r": 0.5, "lam": 1.5},
    dims=(2,),
)
def run_sobolev(cfg, rep, ctx):
    r, lam = cfg.params["r"], cfg.params["lam"]
    if not (r > 0 and 1 < lam):
        raise ConfigError("params", "need r > 0 and lam > 1")
    tab = rep.table("ratios", ["check", "measure", "resolution", "max_ratio"])
    for a in cfg.exponents:
        ev = ExponentVector(a)
        if ev.beta <= 1:
            raise ConfigError("exponents", f"{_label(a)} has beta <= 1; no Sobolev exponent")
    measures = _measures(cfg, "axes")

    def sob(a):
        ev = ExponentVector(a)
        box = aniso_box(np.zeros(ev.d), lam * r, ev)
        fns = random_test_functions(box, cfg.samples, cfg.seed)
        out = []
        for n in cfg.resolution:
            rs = [sobolev_check(ev, GridFunction.from_function(box, n, f), r, lam).ratio for f in fns]
            out.append(max(x for x in rs if not math.isnan(x)))
        return out

    def wp(item):
        label, mu = item
        box = aniso_box(np.zeros(mu.d), 1.5, mu.exponents)
        fns = random_test_functions(box, cfg.samples, cfg.seed)
        out = []
        for n in cfg.resolution:
            rs = [weighted_poincare_check(mu, GridFunction.from_function(box, n, f)).ratio for f in fns]
            out.append(max(x for x in rs if not math.isnan(x)))
        return out

    for kind, labels, results in (
        ("sobolev", [_label(a) for a in cfg.exponents], ctx.map(sob, cfg.exponents)),
        ("weighted-poincare", [m[0] for m in measures], ctx.map(wp, measures)),
    ):
        for label, vals in zip(labels, results):
            for n, v in zip(cfg.resolution, vals):
                tab.add(kind, label, n, v)
            finite = all(0 < v < math.inf for v in vals)
            move = _moved(vals[0], vals[-1])
            rep.measured[f"{kind}_{label}"] = vals
            rep.check(f"{kind}-{label}", finite and move < cfg.tolerances["move"], move, cfg.tolerances["move"])


# ---------------------------------------------------------------------------
# cutoff


def _smooth_weight(x):
    return np.cos(x[..., 0]) + x[..., 1] ** 2 + 0.5


@experiment(
    "cutoff",
    "energy of the cutoff function: robustness in the exponents and monotonicity in lambda",
    exponents=((1.0, 1.0), (1.99, 1.99)),
    measure={"family": "cusp", "params": {"alphas": [1.5, 1.9]}},
    resolution=(16, 32, 64),
    samples=33,
    tolerances={"robust": 4.0, "move": 2.0, "monotone": 1e-9},
    params={"r": 1.0, "lams": [1.25, 1.5, 2.0], "measure_points": 9, "measure_r": 0.5, "measure_lam": 1.5},
    dims=(2,),
)
def run_cutoff(cfg, rep, ctx):
    p = cfg.params
    lams = sorted(p["lams"])
    if not all(1 < x <= 2 for x in lams):
        raise ConfigError("params.lams", "lambda must lie in (1, 2]")
    tab = rep.table("energy", ["measure", "r", "lam", "supremum", "bound_scale", "c1"])

    def scan(a):
        ev = ExponentVector(a)
        return [cutoff_energy_bound(build_cutoff(np.zeros(ev.d), p["r"], lam, ev), Axes(ev), cfg.samples) for lam in lams]

    results = ctx.map(scan, cfg.exponents)
    c1s = {}
    for a, res in zip(cfg.exponents, results):
        label = _label(a)
        sups = [x.supremum for x in res]
        for lam, x in zip(lams, res):
            tab.add(f"axes{label}", p["r"], lam, x.supremum, x.bound_scale, x.c1)
        c1s[label] = [x.c1 for x in res]
        rep.measured[f"c1_axes{label}"] = c1s[label]
        mono = all(s2 <= s1 * (1 + cfg.tolerances["monotone"]) for s1, s2 in zip(sups, sups[1:]))
        rep.check(f"monotone-lambda-{label}", mono, sups)
    # robustness: c1 for the largest exponents against the first vector
    base = c1s[_label(cfg.exponents[0])]
    for a in cfg.exponents[1:]:
        factor = max(_moved(x, y) for x, y in zip(base, c1s[_label(a)]))
        rep.check(f"robust-{_label(a)}", factor < cfg.tolerances["robust"], factor, cfg.tolerances["robust"])

    if cfg.measure is not None:
        mu = _build_measure(cfg.measure)
        tau = build_cutoff(np.zeros(mu.d), p["measure_r"], p["measure_lam"], mu.exponents)
        x = cutoff_energy_bound(tau, mu, p["measure_points"])
        label = f"{cfg.measure['family']}{_label(mu.exponents.alphas)}"
        tab.add(label, p["measure_r"], p["measure_lam"], x.supremum, x.bound_scale, x.c1)
        rep.measured[f"c1_{label}"] = x.c1
        rep.check(f"finite-{label}", 0 < x.c1 < math.inf, x.c1)

    l2 = rep.table("weighted_l2", ["alphas", "resolution", "ratio"])
    lam = 1.5 if 1.5 in lams else lams[len(lams) // 2]
    for a in cfg.exponents:
        ev = ExponentVector(a)
        tau = build_cutoff(np.zeros(ev.d), p["r"], lam, ev)
        vals = []
        for n in cfg.resolution:
            u = GridFunction.from_function(tau.support, n, _smooth_weight)
            vals.append(cutoff_weighted_l2_bound(tau, Axes(ev), u))
            l2.add(list(a), n, vals[-1])
        move = max(_moved(x, y) for x, y in zip(vals, vals[1:])) if len(vals) > 1 else 1.0
        rep.measured[f"weighted_l2_{_label(a)}"] = vals
        rep.check(f"weighted-l2-{_label(a)}", move < cfg.tolerances["move"], move, cfg.tolerances["move"])


# ---------------------------------------------------------------------------
# logarithmic estimate


@experiment(
    "log-estimate",
    "logarithmic energy inequality on random log-normal functions",
    exponents=((1.0, 1.5), (1.8, 0.6)),
    resolution=(32,),
    samples=100,
    params={"families": ["axes", "cusp"], "sigma_max": 2.0},
    dims=(2,),
)
def run_log_estimate(cfg, rep, ctx):
    tab = rep.table("log", ["measure", "sample", "sigma", "energy_term", "log_term", "psi_term", "slack"])
    if cfg.measure is not None:
        measures = _measures(cfg, "axes")
    else:
        measures = []
        for fam in cfg.params["families"]:
            if fam not in ("axes", "cusp", "product-stable", "double-exponent"):
                raise ConfigError("params.families", f"unknown family {fam!r}")
            measures += [(f"{fam}{_label(a)}", _family_measure(fam, a)) for a in cfg.exponents]
    n = cfg.resolution[0]

    def one(item):
        label, mu = item
        ev = mu.exponents
        box = aniso_box(np.zeros(ev.d), 1.5, ev)
        fns = random_test_functions(box, 2 * cfg.samples, cfg.seed)[0::2]  # smooth members
        sig = np.random.default_rng([cfg.seed, 7]).uniform(0.1, cfg.params["sigma_max"], cfg.samples)
        psi = psi_weighted_poincare(ev)
        rows = []
        for i, (f, s) in enumerate(zip(fns, sig)):
            g = GridFunction.from_function(box, n, f)
            w = g.with_values(np.exp(s * g.values / max(np.abs(g.values).max(), 1e-300)))
            rows.append((i, s, log_inequality_check(mu, w, psi)))
        return rows

    for (label, _), rows in zip(measures, ctx.map(one, measures)):
        bad = 0
        for i, s, res in rows:
            tab.add(label, i, s, res.energy_term, res.log_term, res.psi_term, res.slack)
            bad += not res.holds
        rep.check(f"holds-{label}", bad == 0, bad, 0)


# ---------------------------------------------------------------------------
# algebraic inequalities


@experiment(
    "guelle",
    "randomized sweeps of the two algebraic inequalities",
    samples=10**6,
    tolerances={"slack": 1e-12, "example": 1e-4},
    params={"batch": 100_000},
)
def run_guelle(cfg, rep, ctx):
    slack = cfg.tolerances["slack"]
    sweeps = ctx.map(lambda k: guelle_sweep(k, cfg.samples, cfg.seed, cfg.params["batch"], slack), (1, 2))
    tab = rep.table("sweeps", ["inequality", "count", "violations", "worst"])
    for k, s in zip((1, 2), sweeps):
        tab.add(k, s.count, s.violations, s.worst)
        rep.check(f"sweep-{k}", s.violations == 0 and s.count == cfg.samples, s.violations, 0)
    tol = cfg.tolerances["example"]
    e1 = check_guelle1(1.0, 2.0, 1.0, 1.0, 2.0)
    rhs1 = (2.0**-0.5 - 1.0) ** 2
    rep.measured["example1"] = {"lhs": float(e1.lhs), "rhs": float(e1.rhs)}
    rep.check("example-1", bool(e1.ok) and abs(e1.lhs - 0.75) <= tol and abs(e1.rhs - rhs1) <= tol, float(e1.rhs), rhs1)
    e2 = check_guelle2(1.0, 4.0, 1.0, 1.0, 0.5)
    first = (2.0 / 3.0) * (math.sqrt(2.0) - 1.0) ** 2
    rep.measured["example2"] = {"lhs": float(e2.lhs), "rhs": float(e2.rhs), "first_term": first}
    rep.check("example-2", bool(e2.ok) and abs(e2.lhs - 1.5) <= tol, float(e2.lhs), 1.5)
    eq = check_guelle1(3.0, 3.0, 0.4, 0.4, 3.0)
    rep.check("equal-arguments", bool(eq.ok) and float(eq.lhs) == 0.0, float(eq.lhs), 0.0)


# ---------------------------------------------------------------------------
# Moser iteration and Bombieri-Giusti


@experiment(
    "moser",
    "convergence of the Moser product and the exact exponent sums",
    tolerances={"truncation": 1e-12},
    params={"r": 0.5, "R": 1.0, "p": 1.0, "kappa": 1.5, "alpha_max": 1.0, "d": 2, "alpha0": 1.0, "c": 1.0, "n_max": 30},
)
def run_moser(cfg, rep, ctx):
    p = cfg.params
    try:
        sched = MoserScheduleNeg(p["r"], p["R"], p["p"], p["kappa"], p["alpha_max"], int(p["d"]), p["alpha0"])
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    tol = cfg.tolerances["truncation"]
    conv = moser_product_bound(sched, p["c"])
    rep.measured["product"] = conv.product
    rep.measured["terms"] = conv.terms
    rep.measured["c3"] = conv.c3
    tab = rep.table("truncation", ["depth", "log_product", "rel_diff"])
    worst = 0.0
    for depth in (100, 2 * conv.terms):
        alt = moser_product_bound(sched, p["c"], depth=depth)
        diff = abs(math.expm1(alt.log_product - conv.log_product))
        worst = max(worst, diff)
        tab.add(depth, alt.log_product, diff)
    rep.check("truncation-invariant", worst < tol, worst, tol)
    rep.check("finite", math.isfinite(conv.product) and conv.product > 0, conv.product)
    bound = conv.c3 * (sched.R - sched.r) ** (-conv.power)
    rep.check("bound", conv.product <= bound * (1 + 1e-12), conv.product, bound)
    # halving the radius gap raises the product by at most 2^power
    half = MoserScheduleNeg(sched.r, sched.r + (sched.R - sched.r) / 2, sched.p, sched.kappa, sched.alpha_max, sched.d, sched.alpha0)
    factor = math.exp(conv.log_product - moser_product_bound(half, p["c"]).log_product)
    limit = 2.0 ** -conv.power
    rep.check("gap-scaling", factor <= limit * (1 + 1e-9), factor, limit)

    sums = rep.table("exponent_sums", ["n", "sum_kappa", "identity_exact", "identity_error", "sum_weighted", "bound"])
    exact_all, bound_all = True, True
    for n in range(1, int(p["n_max"]) + 1):
        s = moser_exponent_sums(MoserSchedulePos.from_n(n, p["kappa"]))
        sums.add(n, s.sum_kappa, s.identity_exact, s.identity_error, s.sum_weighted, s.bound)
        exact_all &= bool(s.identity_exact)
        bound_all &= bool(s.bound_holds)
    rep.check("identity-exact", exact_all, str(Fraction(p["kappa"])))
    rep.check("weighted-bound", bound_all)


@experiment(
    "bombieri-giusti",
    "hypotheses of the Bombieri-Giusti lemma on a constant and a constructed counterexample",
    exponents=((1.0, 1.5),),
    resolution=(24,),
    params={"m": 2.0, "c0": 1.0, "theta": 0.5, "eta": 0.5, "plateau": 100.0},
    dims=(1, 2, 3),
)
def run_bombieri_giusti(cfg, rep, ctx):
    p = cfg.params
    try:
        bg = BGParams(p["m"], p["c0"], p["theta"], p["eta"])
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None
    n = cfg.resolution[0]
    tab = rep.table("bg", ["alphas", "case", "c0_first", "c0_second", "first_ok", "second_ok", "C", "C_scale_free"])
    for a in cfg.exponents:
        ev = ExponentVector(a)
        U = cylinder_family(ev, "Q-")
        one = bombieri_giusti_check(lambda t, x: np.ones(len(x)), U, bg, n, n)
        tab.add(list(a), "constant", one.c0_first, one.c0_second, one.first_ok, one.second_ok, one.C, one.C_scale_free)
        rep.check(f"constant-passes-{_label(a)}", one.hypotheses_ok and abs(one.C - 1.0) < 1e-12, one.C, 1.0)
        level = p["plateau"]
        plateau = bombieri_giusti_check(lambda t, x: np.where(x[:, 0] > 0, math.exp(level), 1.0), U, bg, n, n)
        tab.add(list(a), "plateau", plateau.c0_first, plateau.c0_second, plateau.first_ok, plateau.second_ok, plateau.C, plateau.C_scale_free)
        rep.measured[f"plateau_c0_first_{_label(a)}"] = plateau.c0_first
        rep.check(f"plateau-flagged-{_label(a)}", not plateau.first_ok, len(plateau.first_violations))


# ---------------------------------------------------------------------------
# Harnack, oscillation, Hoelder


def _bump_data(rng: np.random.Generator, period: float):
    k = int(rng.integers(1, 5))
    centres = rng.uniform(-period / 4, period / 4, (k, 2))
    widths = rng.uniform(0.7, 1.5, k)
    amps = rng.uniform(0.2, 1.0, k)
    base = float(rng.uniform(0.0, 0.05)) if rng.uniform() < 0.5 else 0.0

    def g(x):
        out = np.full(x.shape[:-1], base)
        for c, w, a in zip(centres, widths, amps):
            out = out + a * np.exp(-np.sum((x - c) ** 2, axis=-1) / w**2)
        return out

    return g


@experiment(
    "harnack",
    "weak Harnack ratios over an ensemble of nonnegative solutions",
    exponents=((1.0, 1.5), (1.0, 1.0), (1.8, 0.6)),
    resolution=(16, 32),
    samples=51,
    tolerances={"move": 2.0},
    params={"period": 16.0, "modes": 32, "t0": -2.0, "forcing_max": 0.5},
    dims=(2,),
    min_samples=1,
)
def run_harnack(cfg, rep, ctx):
    p = cfg.params
    P = p["period"]
    if P < 8.0:
        raise ConfigError("params.period", "the period cell must contain the Harnack cylinders; use >= 8")

    def member(i):
        rng = np.random.default_rng([cfg.seed, i])
        ev = ExponentVector(cfg.exponents[i % len(cfg.exponents)])
        u0 = SpectralField.from_function(_bump_data(rng, P), P, int(p["modes"]), ev)
        floor = positivity_floor(u0)
        if floor < 0:
            # the semigroup preserves the minimum of the interpolant
            u0 = u0.with_modes(u0.modes + _constant_modes(u0.shape, -2.0 * floor))
        forcing, f = None, 0.0
        if i % 2 == 1:
            f = float(rng.uniform(0.0, p["forcing_max"]))
            forcing = u0.with_modes(_constant_modes(u0.shape, f))
        u = spectral_accessor(u0, p["t0"], forcing)
        return ev.alphas, f, [harnack_ratio(u, f, ev, n, max(n // 2, 4)) for n in cfg.resolution]

    rows = ctx.map(member, range(cfg.samples))
    tab = rep.table("ratios", ["member", "alphas", "forcing", "resolution", "ratio", "l1_early", "inf_late"])
    maxima = [0.0] * len(cfg.resolution)
    finite = True
    for i, (alphas, f, res) in enumerate(rows):
        for j, (n, h) in enumerate(zip(cfg.resolution, res)):
            tab.add(i, list(alphas), f, n, h.ratio, h.l1_early, h.inf_late)
            finite &= math.isfinite(h.ratio)
            maxima[j] = max(maxima[j], h.ratio)
    rep.measured["ensemble_max"] = maxima
    rep.check("finite", finite, cfg.samples)
    rep.check("ensemble-size", cfg.samples >= 50, cfg.samples, 50)
    move = max(_moved(x, y) for x, y in zip(maxima, maxima[1:])) if len(maxima) > 1 else 1.0
    rep.check("refinement", move < cfg.tolerances["move"], move, cfg.tolerances["move"])


def _constant_modes(shape, value: float) -> np.ndarray:
    m = np.zeros(shape, dtype=complex)
    m[(0,) * len(shape)] = value
    return m


@experiment(
    "oscillation",
    "oscillation decay and Hoelder quotients for solutions from rough data",
    exponents=((1.0, 1.5), (1.0, 1.0), (1.5, 0.8), (1.9, 1.9), (0.6, 1.2)),
    resolution=(64,),
    samples=20,
    params={"period": 32.0, "t0": -3.0, "nu_max": 3, "holder_pairs": 4000},
    dims=(2,),
)
def run_oscillation(cfg, rep, ctx):
    p = cfg.params
    nu_max = int(p["nu_max"])
    n = cfg.resolution[0]

    def member(i):
        rng = np.random.default_rng([cfg.seed, i])
        ev = ExponentVector(cfg.exponents[i % len(cfg.exponents)])
        u0 = SpectralField.from_values(rng.choice([-1.0, 1.0], (n, n)), p["period"], ev)
        u = spectral_accessor(u0, p["t0"])
        o = oscillation_decay(u, ev, nu_max)
        h = None
        if o.gamma > 0 and math.isfinite(o.gamma):
            cyl = standard_cylinders(ev, 0.5)["Dhat"]
            h = holder_quotient(u, ev, cyl, min(o.gamma, 1.0), int(p["holder_pairs"]), seed=cfg.seed + i)
        return ev.alphas, o, h

    rows = ctx.map(member, range(cfg.samples))
    tab = rep.table("decay", ["member", "alphas", "nu", "radius", "osc"])
    hol = rep.table("holder", ["member", "alphas", "gamma", "quotient", "sup_norm", "eta"])
    mono, positive = True, True
    gammas = []
    for i, (alphas, o, h) in enumerate(rows):
        for nu, (r, v) in enumerate(zip(o.radii, o.osc)):
            tab.add(i, list(alphas), nu, r, v)
        mono &= o.nonincreasing
        positive &= bool(o.gamma > 0)
        gammas.append(o.gamma)
        if h is not None:
            hol.add(i, list(alphas), o.gamma, h.quotient, h.sup_norm, h.eta)
    rep.measured["gamma_min"] = min(gammas)
    rep.measured["gamma_max"] = max(gammas)
    rep.check("ensemble-size", cfg.samples >= 20, cfg.samples, 20)
    rep.check("nonincreasing", mono)
    rep.check("gamma-positive", positive, min(gammas), 0.0)
    rep.check("holder-finite", all(h is not None and math.isfinite(h.quotient) for _, _, h in rows))
    rep.figures["decay"] = {"oscillation-decay.svg": figures.decay_figure(rows[0][1].radii, [o.osc for _, o, _ in rows])}


# ---------------------------------------------------------------------------
# cusp figures


@experiment(
    "cusp-plot",
    "cusp parameters and figures of the cusp region and its decompositions",
    exponents=((1.0, 1.0), (0.1, 1.9), (1.97, 1.48)),
    resolution=(200,),
    tolerances={"gamma": 0.01},
    params={"tail_r": 0.5, "ab_radii": [0.7, 1.3], "ab_point": [-0.2, -0.2]},
    dims=(2,),
)
def run_cusp_plot(cfg, rep, ctx):
    n = cfg.resolution[0]
    p = cfg.params
    tab = rep.table("params", ["alphas", "gamma", "b1", "b2", "C", "shaded_fraction"])
    figs = {}
    for a in cfg.exponents:
        cp = cusp_params(*a)
        frac = figures.shaded_fraction(cp, 1.0, n)
        tab.add(list(a), cp.gamma, cp.b1, cp.b2, cp.C, frac)
        tag = "-".join(f"{x:g}" for x in a)
        rep.measured[f"gamma_{_label(a)}"] = cp.gamma
        rep.measured[f"shaded_{_label(a)}"] = frac
        figs[f"gamma-{tag}.svg"] = figures.gamma_figure(a, cp)
        figs[f"tail-{tag}.svg"] = figures.tail_figure(a, cp, p["tail_r"])
        for r in p["ab_radii"]:
            for x in ((0.0, 0.0), tuple(p["ab_point"])):
                A, B, target = figures.ab_masks(a, cp, r, x)
                ext = 2.0
                c = -ext + (np.arange(n) + 0.5) * 2 * ext / n
                Z = np.stack(np.meshgrid(c, c, indexing="ij"), -1)
                mismatch = int(np.count_nonzero((A(Z) | B(Z)) != target(Z)))
                rep.check(f"decomposition-{tag}-r{r:g}-x{x[0]:g}_{x[1]:g}", mismatch == 0, mismatch, 0)
                figs[f"ab-{tag}-r{r:g}-x{x[0]:g}_{x[1]:g}.svg"] = figures.ab_figure(a, cp, r, x)
        if a[0] == a[1]:
            rep.check(f"isotropic-{tag}", cp.gamma == a[0] and cp.b1 == 1.0 and cp.b2 == 1.0, cp.gamma, a[0])
            rep.check(f"isotropic-shading-{tag}", frac == 1.0, frac, 1.0)
    fr = {tuple(a): rep.measured[f"shaded_{_label(a)}"] for a in cfg.exponents}
    if (0.1, 1.9) in fr and (1.97, 1.48) in fr:
        # strong cusps cut away most of the square near the origin
        rep.check("strong-cusps-(0.1,1.9)", fr[(0.1, 1.9)] < fr[(1.97, 1.48)] < 1.0, fr[(0.1, 1.9)], fr[(1.97, 1.48)])
    tol = cfg.tolerances["gamma"]
    g1 = cusp_params(0.1, 1.9).gamma
    rep.check("gamma-(0.1,1.9)", abs(g1 - 19.9) <= 1e-9, g1, 19.9)
    g2 = cusp_params(1.97, 1.48).gamma
    rep.check("gamma-(1.97,1.48)", abs(g2 - 2.30) <= tol, g2, 2.30)
    rep.figures["gamma"] = figs


# ---------------------------------------------------------------------------
# Monte Carlo against spectral evolution


def _trig_data(period: float):
    def g(x):
        out = 1.0 + 0.0 * x[..., 0]
        for m1 in range(-2, 3):
            for m2 in range(-2, 3):
                xi = 2 * np.pi / period * np.array([m1, m2])
                out = out + 0.3 * np.cos(x @ xi + 0.1 * (m1 + 3 * m2)) / (1 + m1 * m1 + m2 * m2)
        return out

    return g


@experiment(
    "mc-vs-spectral",
    "Monte Carlo estimates of the solution against spectral evolution",
    exponents=((1.0, 1.0), (0.5, 1.5), (1.9, 1.9)),
    samples=100_000,
    tolerances={"z": 3.0},
    params={"times": [0.1, 1.0], "probes": 20, "probe_seed": 7, "period": 16.0, "modes": 8, "extent": 3.0},
    dims=(2,),
)
def run_mc_vs_spectral(cfg, rep, ctx):
    p = cfg.params
    g = _trig_data(p["period"])
    pts = np.random.default_rng(int(p["probe_seed"])).uniform(-p["extent"], p["extent"], (int(p["probes"]), 2))
    tab = rep.table("probes", ["alphas", "t", "x1", "x2", "estimate", "stderr", "reference", "z", "N", "seed"])
    zlim = cfg.tolerances["z"]
    for a in cfg.exponents:
        ev = ExponentVector(a)
        u0 = SpectralField.from_function(g, p["period"], int(p["modes"]), ev)
        for t in p["times"]:
            if not t > 0:
                raise ConfigError("params.times", "times must be positive")
            est = estimate_solution(g, ev, t, pts, cfg.samples, seed=cfg.seed, workers=ctx.workers)
            ref = evolve(u0, t).evaluate(pts)
            z = (est.estimate - ref) / est.stderr
            for x, e, s, r, zz in zip(pts, est.estimate, est.stderr, ref, z):
                tab.add(list(a), t, x[0], x[1], e, s, r, zz, cfg.samples, cfg.seed)
            worst = float(np.max(np.abs(z)))
            rep.check(f"agree-{_label(a)}-t{t:g}", worst <= zlim, worst, zlim)


def names() -> list:
    return sorted(REGISTRY)
