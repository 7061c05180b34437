"""Batch verification driver: suites, configuration, reports and the command line."""

from .config import SUITES, TOLERANCES, ConfigError, SuiteConfig, load_config
from .records import CheckRecord, Recorder, emit_report
from .suites import SUITE_FUNCS, run_suite
from .main import main

__all__ = [
    "SUITES",
    "TOLERANCES",
    "ConfigError",
    "SuiteConfig",
    "load_config",
    "CheckRecord",
    "Recorder",
    "emit_report",
    "SUITE_FUNCS",
    "run_suite",
    "main",
]
