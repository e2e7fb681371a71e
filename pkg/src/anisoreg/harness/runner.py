"""Dispatch validated configs to experiments."""

from __future__ import annotations

import time
from collections import Counter

from .config import ConfigError, ExperimentConfig
from .experiments import REGISTRY, Context
from .report import ExperimentReport


def run(cfg: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run one experiment.  The report content depends only on ``cfg``."""
    if cfg.name not in REGISTRY:
        raise ConfigError("name", f"unknown experiment {cfg.name!r}")
    if workers < 1:
        raise ConfigError("workers", "need at least one worker")
    from .. import __version__

    report = ExperimentReport(cfg.name, cfg.echo(), __version__)
    start = time.perf_counter()
    REGISTRY[cfg.name].run(cfg, report, Context(workers))
    report.wall_time = time.perf_counter() - start
    return report


def run_all(configs: list, workers: int = 1) -> list:
    """Run configs in order; repeated names get numbered file prefixes."""
    totals = Counter(c.name for c in configs)
    seen = Counter()
    reports = []
    for cfg in configs:
        seen[cfg.name] += 1
        rep = run(cfg, workers)
        if totals[cfg.name] > 1:
            rep.tag = f"{cfg.name}-{seen[cfg.name]}"
        reports.append(rep)
    return reports
