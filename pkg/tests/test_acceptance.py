"""Acceptance criteria 1-10.

Each test runs the corresponding experiment with its default configuration,
checks the outcome and the runtime budget, and prints one PASS/FAIL line.
"""

import math
import time

from anisoreg.geometry import ExponentVector
from anisoreg.harness.config import parse_config
from anisoreg.harness.report import dumps
from anisoreg.harness.runner import run
from anisoreg.kernels import cusp_params, mu_axes_tail_exact


def _report(capsys, number: int, title: str, ok: bool, elapsed: float, budget: float, detail: str = ""):
    in_time = elapsed < budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"{status} criterion {number:2d}: {title} ({elapsed:.1f} s"
    line += f", budget {budget:g} s)" if math.isfinite(budget) else ")"
    if detail:
        line += f" {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line
    assert in_time, line


def _run(name: str, workers: int = 1, **fields):
    (cfg,) = parse_config({"experiment": {"name": name, **fields}})
    start = time.perf_counter()
    rep = run(cfg, workers)
    return rep, time.perf_counter() - start


def _failures(rep) -> str:
    bad = [c.name for c in rep.checks if not c.passed]
    return f"failed checks: {bad}" if bad else ""


def test_criterion_01_exact_tail(capsys):
    rep, dt = _run("tail-check")
    dims = {len(a) for a in rep.config["exponents"]}
    per_dim = {d: sum(len(a) == d for a in rep.config["exponents"]) for d in dims}
    ok = rep.passed and dims == {1, 2, 3} and min(per_dim.values()) >= 3
    ok &= rep.config["params"]["radii"] == [0.25, 1.0, 2.0] and rep.config["tolerances"]["rel"] == 1e-6
    ok &= mu_axes_tail_exact(ExponentVector((1.0, 1.0)), 1.0) == 4.0
    _report(capsys, 1, "exact tail formula against quadrature", ok, dt, 10.0, _failures(rep))


def test_criterion_02_cusp_parameters(capsys):
    start = time.perf_counter()
    g1 = cusp_params(0.1, 1.9).gamma
    g2 = cusp_params(1.97, 1.48).gamma
    iso = [cusp_params(a, a) for a in (0.3, 1.0, 1.5, 1.99)]
    dt = time.perf_counter() - start
    ok = abs(g1 - 19.9) < 1e-9 and abs(g2 - 2.30) < 0.01
    ok &= all(p.gamma == a and p.b1 == 1.0 and p.b2 == 1.0 for p, a in zip(iso, (0.3, 1.0, 1.5, 1.99)))
    rep, _ = _run("cusp-plot")
    ok &= rep.passed
    _report(capsys, 2, f"cusp parameters gamma={g1:.6g}, {g2:.4g}", ok, dt, 1.0, _failures(rep))


def test_criterion_03_algebraic_inequalities(capsys):
    rep, dt = _run("guelle")
    ok = rep.passed and rep.config["samples"] == 10**6 and rep.config["tolerances"]["slack"] == 1e-12
    _report(capsys, 3, "10^6 tuples per algebraic inequality, zero violations", ok, dt, 60.0, _failures(rep))


def test_criterion_04_comparability(capsys):
    rep, dt = _run("comparability")
    ok = rep.passed and rep.config["resolution"] == [64, 128] and rep.config["samples"] == 100
    ok &= [list(a) for a in rep.config["exponents"]] == [[1.0, 1.0], [1.5, 1.9], [0.5, 1.5]]
    ok &= rep.config["tolerances"]["move"] == 2.0
    _report(capsys, 4, "cusp/axes energy ratios stable under refinement", ok, dt, 300.0, _failures(rep))


def test_criterion_05_poincare_robust(capsys):
    rep, dt = _run("poincare")
    consts = [v for k, v in rep.measured.items() if k.startswith("constant_")]
    spread = max(consts) / min(consts)
    ok = rep.passed and len(consts) == 4 and spread < 10.0
    ok &= [list(a) for a in rep.config["exponents"]] == [[1.0, 1.0], [1.5, 1.5], [1.9, 1.9], [1.99, 1.99]]
    _report(capsys, 5, f"Poincare constants spread {spread:.3g} < 10", ok, dt, 300.0, _failures(rep))


def test_criterion_06_spectral_stochastic(capsys):
    rep, dt = _run("mc-vs-spectral")
    agree = [c for c in rep.checks if c.name.startswith("agree-")]
    worst = max(c.value for c in agree)
    ok = rep.passed and len(agree) == 6 and rep.config["samples"] == 10**5 and rep.config["params"]["probes"] == 20
    ok &= rep.config["params"]["times"] == [0.1, 1.0] and worst <= 3.0
    _report(capsys, 6, f"Monte Carlo within 3 standard errors (max |z| = {worst:.3g})", ok, dt, 120.0, _failures(rep))


def test_criterion_07_weak_harnack(capsys):
    rep, dt = _run("harnack")
    m = rep.measured["ensemble_max"]
    move = max(m) / min(m)
    ok = rep.passed and rep.config["samples"] >= 50 and rep.config["params"]["period"] == 16.0
    ok &= all(math.isfinite(x) for x in m) and move < 2.0
    _report(capsys, 7, f"weak Harnack ratios finite, ensemble max moves x{move:.3g}", ok, dt, 600.0, _failures(rep))


def test_criterion_08_oscillation_decay(capsys):
    rep, dt = _run("oscillation")
    ok = rep.passed and rep.config["samples"] >= 20 and rep.config["params"]["nu_max"] == 3
    ok &= rep.measured["gamma_min"] > 0
    detail = f"gamma in [{rep.measured['gamma_min']:.3g}, {rep.measured['gamma_max']:.3g}]"
    _report(capsys, 8, f"oscillation nonincreasing, {detail}", ok, dt, 600.0, _failures(rep))


def test_criterion_09_moser_and_bombieri_giusti(capsys):
    moser, t1 = _run("moser")
    bg, t2 = _run("bombieri-giusti")
    names = {c.name for c in moser.checks if c.passed}
    ok = moser.passed and bg.passed and {"truncation-invariant", "identity-exact"} <= names
    ok &= moser.config["params"]["n_max"] == 30
    ok &= any(c.name.startswith("plateau-flagged") and c.passed for c in bg.checks)
    _report(capsys, 9, "Moser product converges, exponent sums exact, BG checker", ok, t1 + t2, 30.0, _failures(moser) + _failures(bg))


DETERMINISM = [
    ("tail-check", {}),
    ("guelle", {}),
    ("mc-vs-spectral", {}),
    ("comparability", {"samples": 10, "resolution": [16, 32]}),
    ("oscillation", {"samples": 4}),
]


def _blob(rep) -> str:
    return dumps([rep]) + "".join(t.to_csv() for t in rep.tables)


def test_criterion_10_determinism(capsys):
    start = time.perf_counter()
    differing = []
    for name, fields in DETERMINISM:
        blobs = [_blob(_run(name, workers=w, **fields)[0]) for w in (1, 4, 8)]
        blobs.append(_blob(_run(name, workers=1, **fields)[0]))
        if len(set(blobs)) != 1:
            differing.append(name)
    dt = time.perf_counter() - start
    detail = f"differing: {differing}" if differing else ""
    title = f"byte-identical reports under 1, 4, 8 workers ({len(DETERMINISM)} experiments)"
    _report(capsys, 10, title, not differing, dt, math.inf, detail)
