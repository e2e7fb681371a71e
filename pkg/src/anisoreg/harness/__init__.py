"""Configuration, orchestration and reporting of experiments."""

from .config import ConfigError, ExperimentConfig, build_config, load_config, override, parse_config
from .experiments import REGISTRY, names
from .figures import emit_figures
from .report import Check, ExperimentReport, Table, dumps, write_outputs
from .runner import run, run_all

__all__ = [
    "Check",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "REGISTRY",
    "Table",
    "build_config",
    "dumps",
    "emit_figures",
    "load_config",
    "names",
    "override",
    "parse_config",
    "run",
    "run_all",
    "write_outputs",
]
