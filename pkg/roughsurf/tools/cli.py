"""
Command-line entry point ``roughsurf`` with the subcommands:

- ``forward`` - far-field patterns of the configured true profile, one CSV per wavenumber and direction,
- ``synthesize`` - a noisy multi-frequency dataset of the configured true profile,
- ``invert`` - reconstructs the profile from a dataset, saving a profile snapshot after every stage,
- ``check`` - runs the invariant suite of :mod:`roughsurf.tools.checks`.

Exit codes: 0 on success, 1 if a run fails or a check does not pass, 2 for invalid input (configuration,
dataset or arguments), 130 if interrupted.
"""
from dataclasses import replace
from typing import Optional, Sequence
import argparse
import json
import logging
import os
import sys

import numpy as np
import yaml

from roughsurf.forward import IncidentWave, assemble, far_field, observation_angles, solve_scattering
from roughsurf.geometry import build_mesh
from roughsurf.inversion import (InversionState, MeasurementSet, Reconstruction, StageStats, build_continuation,
                                 mesh_size, profile_error, stopping_threshold, synthesize_measurements)
from roughsurf.utils import ArtifactIntegrityError, ConfigValidationError, SavableLoadable
from .artifacts import stable_hash, verify_artifact, write_csv, write_json, write_ndjson
from .checks import CHECKS, run_checks
from .config_loaders import ExperimentConfig, load_experiment_config


_logger = logging.getLogger('roughsurf.tools')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_INPUT = 2
EXIT_INTERRUPTED = 130


def _parse_variables(assignments: Optional[Sequence[str]]) -> dict:
    """``name=value`` pairs with values read as YAML scalars"""
    variables = {}
    for assignment in assignments or []:
        name, sep, value = assignment.partition('=')
        if not sep or not name:
            raise ConfigValidationError(f'"{assignment}" is not of the form name=value', field='--var')
        variables[name.strip()] = yaml.safe_load(value)
    return variables


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    config = load_experiment_config(args.config, _parse_variables(args.var))
    overrides = {}
    if getattr(args, 'seed', None) is not None:
        overrides['seed'] = args.seed
    if getattr(args, 'threads', None) is not None:
        overrides['threads'] = args.threads
    return replace(config, **overrides)


def _config_hash(config: ExperimentConfig) -> str:
    return stable_hash(config.to_dict())


def _run_forward(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config_hash = _config_hash(config)
    profile = config.true_profile()
    angles = observation_angles(config.n_f)
    for k in config.schedule:
        mesh = build_mesh(profile, mesh_size(config.mesh_rule(), k))
        system = assemble(mesh, k, k)
        for l, theta in enumerate(config.directions):
            pattern = far_field(mesh, solve_scattering(system, IncidentWave(k, theta)), k, k, angles)
            rows = [(repr(float(angle)), repr(float(value.real)), repr(float(value.imag)))
                    for angle, value in zip(pattern.angles, pattern.values)]
            path = write_csv(os.path.join(args.out, f'farfield_k{k:g}_d{l}.csv'), ['angle', 're', 'im'], rows,
                             config_hash)
            _logger.info(f'Far field at k={k:g}, direction {l} saved to {path}')
    return EXIT_OK


def _run_synthesize(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config_hash = _config_hash(config)
    profile = config.true_profile()
    measurements = synthesize_measurements(profile, config.schedule, config.directions, config.n_f, config.delta,
                                           config.seed, n_per_k=config.mesh_rule(), verbose=config.verbose)
    measurements.metadata.update({'name': config.name, 'true_profile': repr(profile)})
    path = write_json(os.path.join(args.out, f'{config.name}{MeasurementSet.file_extension}'),
                      measurements.to_dict(), config_hash)
    _logger.info(f'Dataset saved to {path}')
    return EXIT_OK


def _load_dataset(path: str, config: ExperimentConfig) -> tuple[MeasurementSet, dict]:
    provenance = verify_artifact(path)
    with open(path, 'r', encoding='utf-8') as file:
        measurements = MeasurementSet.from_dict(json.load(file))
    if (len(measurements.wavenumbers) != len(config.schedule)
            or not np.allclose(measurements.wavenumbers, config.schedule)):
        raise ConfigValidationError(f'the dataset holds wavenumbers {measurements.wavenumbers.tolist()}',
                                    field='schedule')
    if (len(measurements.thetas) != len(config.directions)
            or not np.allclose(measurements.thetas, config.directions)):
        raise ConfigValidationError(f'the dataset holds directions {measurements.thetas.tolist()}',
                                    field='directions')
    if provenance['config_hash'] != _config_hash(config):
        _logger.warning(f'{path} was synthesized from a different configuration than the one being used.')
    return measurements, provenance


def _write_reconstruction(out: str,
                          config: ExperimentConfig,
                          config_hash: str,
                          state: InversionState,
                          stage_stats: dict[str, StageStats],
                          metadata: dict,
                          interrupted: bool = False,
                          ) -> str:
    reconstruction = Reconstruction(
        coefficients=state.coefficients,
        basis_size=config.basis_size,
        radius=config.radius,
        kappa=config.kappa,
        log=[record.to_dict() for record in state.log],
        stage_status={stage_id: stats.status for stage_id, stats in stage_stats.items()},
        metadata={**metadata, 'profile_error': profile_error(config.true_profile(), config.basis().profile(
            state.coefficients), config.radius, config.snapshot_points)},
    )
    path = SavableLoadable.prep_save_file(os.path.join(out, f'{config.name}{Reconstruction.file_extension}'),
                                          interrupted)
    write_ndjson(SavableLoadable.prep_save_file(os.path.join(out, 'iterations.ndjson'), interrupted),
                 reconstruction.log, config_hash)
    return write_json(path, reconstruction.to_dict(), config_hash)


def _run_invert(args: argparse.Namespace) -> int:
    config = _load_config(args)
    config_hash = _config_hash(config)
    measurements, provenance = _load_dataset(args.dataset, config)
    basis = config.basis()
    settings = config.settings()
    true_profile = config.true_profile()
    x1 = np.linspace(-config.radius, config.radius, config.snapshot_points)

    def write_snapshot(state: InversionState, stats: StageStats, stage_id: str) -> None:
        reconstructed = basis.profile(state.coefficients)
        rows = [(repr(float(x)), repr(float(h)), repr(float(r)))
                for x, h, r in zip(x1, true_profile(x1), reconstructed(x1))]
        write_csv(os.path.join(args.out, f'profile_{stage_id}.csv'), ['x1', 'h_true', 'h_reconstructed'], rows,
                  config_hash)

    continuation = build_continuation(measurements, config.tau, settings,
                                      output_dir=os.path.join(args.out, 'stages'), stage_callback=write_snapshot)
    state = InversionState.initial(basis)
    metadata = {
        'config_hash': config_hash,
        'dataset_sha256': provenance['content_sha256'],
        'threshold': stopping_threshold(measurements.delta, config.tau, settings),
        'rho': config.rho,
        'tau': config.tau,
    }
    try:
        continuation.run(state, measurements, basis, config.rho, settings, verbose=config.verbose)
    except KeyboardInterrupt:
        _logger.warning('Inversion interrupted, saving the current state.')
        _write_reconstruction(args.out, config, config_hash, state, continuation.stats, metadata, interrupted=True)
        return EXIT_INTERRUPTED
    except Exception:
        _logger.exception('Inversion failed, saving the current state.')
        _write_reconstruction(args.out, config, config_hash, state, continuation.stats, metadata, interrupted=True)
        return EXIT_FAILURE
    path = _write_reconstruction(args.out, config, config_hash, state, continuation.stats, metadata)
    _logger.info(f'Reconstruction saved to {path}')
    return EXIT_OK


def _run_check(args: argparse.Namespace) -> int:
    report = run_checks(args.only)
    document = report.to_dict()
    print(json.dumps(document, indent=2))
    if args.out:
        write_json(args.out, document, stable_hash({'checks': args.only or list(CHECKS)}))
    return EXIT_OK if report.passed else EXIT_FAILURE


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='roughsurf',
                                     description='Scattering by and reconstruction of a locally rough plane.')
    parser.add_argument('-v', '--verbose', action='count', default=0, help='More logging output.')
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_config_arguments(subparser: argparse.ArgumentParser) -> None:
        subparser.add_argument('--config', required=True, help='Experiment configuration file.')
        subparser.add_argument('--out', required=True, help='Output directory.')
        subparser.add_argument('--var', action='append', metavar='NAME=VALUE',
                               help='Value of a $NAME reference in the configuration.')
        subparser.add_argument('--threads', type=int, help='Override the number of Jacobian threads.')
        subparser.add_argument('--seed', type=int, help='Override the noise seed.')

    forward = subparsers.add_parser('forward', help='Compute far-field patterns of the true profile.')
    add_config_arguments(forward)
    forward.set_defaults(handler=_run_forward)

    synthesize = subparsers.add_parser('synthesize', help='Synthesize a noisy dataset.')
    add_config_arguments(synthesize)
    synthesize.set_defaults(handler=_run_synthesize)

    invert = subparsers.add_parser('invert', help='Reconstruct the profile from a dataset.')
    add_config_arguments(invert)
    invert.add_argument('--dataset', required=True, help='Dataset written by "synthesize".')
    invert.set_defaults(handler=_run_invert)

    check = subparsers.add_parser('check', help='Run the invariant checks.')
    check.add_argument('--only', nargs='+', choices=list(CHECKS), help='Run only these checks.')
    check.add_argument('--out', help='Also write the report to this JSON file.')
    check.set_defaults(handler=_run_check)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    try:
        return args.handler(args)
    except (ConfigValidationError, ArtifactIntegrityError, FileNotFoundError) as e:
        print(f'[error] {e}', file=sys.stderr)
        return EXIT_INVALID_INPUT
    except KeyboardInterrupt:
        return EXIT_INTERRUPTED


if __name__ == '__main__':
    sys.exit(main())
