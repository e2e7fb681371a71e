"""Command line: ``anisoreg run --config FILE`` and ``anisoreg list``."""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config, override
from .experiments import REGISTRY, names
from .figures import emit_figures
from .report import write_outputs
from .runner import run_all



def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anisoreg", description="Numerical experiments for anisotropic nonlocal regularity.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the experiments of a config file")
    r.add_argument("--config", required=True, help="YAML config file")
    r.add_argument("--seed", type=int, default=None, help="master seed; overrides the config")
    r.add_argument("--out", default=None, help="output directory; overrides the config")
    r.add_argument("--workers", type=int, default=1, help="worker threads; results do not depend on it")
    r.add_argument("--no-figures", action="store_true", help="skip SVG output")
    r.add_argument("-q", "--quiet", action="store_true", help="print only failures and the summary")
    sub.add_parser("list", help="list experiments")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name in names():
            print(f"{name:18s} {REGISTRY[name].summary}")
        return 0
    try:
        configs = [override(c, args.seed, args.out) for c in load_config(args.config)]
        if args.workers < 1:
            raise ConfigError("workers", "need at least one worker")
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not configs:
        print("no experiments in config")
        return 0
    try:
        reports = run_all(configs, args.workers)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    # all experiments of one file share an output directory: the first one's
    out = configs[0].out
    write_outputs(reports, out)
    if not args.no_figures:
        for rep in reports:
            emit_figures(rep, None, out)
    failed = None
    for rep in reports:
        for c in rep.checks:
            if not args.quiet or not c.passed:
                print(c.line(rep.prefix))
            if not c.passed and failed is None:
                failed = f"{rep.prefix}/{c.name}"
    total = sum(len(r.checks) for r in reports)
    bad = sum(not c.passed for r in reports for c in r.checks)
    print(f"{total - bad}/{total} checks passed; report in {out}/report.json")
    if failed is not None:
        print(f"first failing check: {failed}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
