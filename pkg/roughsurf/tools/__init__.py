"""
Configuration, provenance of result files, invariant checks and the command-line entry point.

The idea behind ``roughsurf.tools`` is that no other module depends on it, but it itself does depend on
other modules. That is different to :mod:`roughsurf.utils` which works the other way around.

Exported classes:

- :class:`ExperimentConfig`
- :class:`CheckResult`
- :class:`CheckReport`

Exported functions:

- :func:`load_experiment_config`
- :func:`validate_config`
- :func:`parse_angle`
- :func:`parse_schedule`
- :func:`stable_hash`
- :func:`write_csv`
- :func:`write_ndjson`
- :func:`write_json`
- :func:`verify_artifact`
- :func:`run_checks`
- :func:`main`
"""

from .config_loaders import ExperimentConfig, load_experiment_config, validate_config, parse_angle, parse_schedule
from .artifacts import stable_hash, write_csv, write_ndjson, write_json, verify_artifact
from .checks import CheckResult, CheckReport, CHECKS, run_checks
from .cli import main

__all__ = [
    'ExperimentConfig',
    'CheckResult',
    'CheckReport',
    'CHECKS',
    'load_experiment_config',
    'validate_config',
    'parse_angle',
    'parse_schedule',
    'stable_hash',
    'write_csv',
    'write_ndjson',
    'write_json',
    'verify_artifact',
    'run_checks',
    'main',
]
