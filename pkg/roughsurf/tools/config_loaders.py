from dataclasses import asdict, dataclass, field, fields
from typing import Any, Optional, Union
import logging
import os
import re

import numpy as np
import yaml

from roughsurf.geometry import MIN_MESH_SIZE, ClosedFormProfile, SurfaceProfile
from roughsurf.inversion import MeshRule, SolverSettings, SplineBasis
from roughsurf.utils import ConfigValidationError


VARIABLE_PREFIX = '$'
LOAD_ATTR_NAME = '_load'

_logger = logging.getLogger('roughsurf.tools')

_ODD_SCHEDULE = re.compile(r'^\s*odd\(\s*(\d+)\s*\)\s*$')
_PI_ANGLE = re.compile(r'^\s*(?P<sign>[+-])?\s*(?:(?P<factor>\d+(?:\.\d*)?)\s*\*?\s*)?pi\s*'
                       r'(?:/\s*(?P<divisor>\d+(?:\.\d*)?))?\s*$')


def __merge(defaults: dict, overrides: dict) -> dict:
    """
    Merges two configurations, descending into nested dictionaries present in both.
    Values from ``overrides`` win.
    """
    merged = defaults.copy()
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(defaults.get(key), dict):
            merged[key] = __merge(defaults[key], value)
        else:
            merged[key] = value
    return merged


def __inject(value: Any, variables: dict, path: str = '') -> Any:
    """
    Replaces every ``$name`` string in nested dictionaries and lists with ``variables[name]``.

    Raises:
        ConfigValidationError: If a referenced variable has no value.
    """
    if isinstance(value, dict):
        return {key: __inject(item, variables, _join(path, key)) for key, item in value.items()}
    if isinstance(value, list):
        return [__inject(item, variables, f'{path}[{i}]') for i, item in enumerate(value)]
    if isinstance(value, str) and value.startswith(VARIABLE_PREFIX):
        name = value.removeprefix(VARIABLE_PREFIX)
        if name not in variables:
            raise ConfigValidationError(f'variable "{name}" is referenced but no value was provided', path)
        return variables[name]
    return value


def __resolve_single_load(parent: dict, root_path: str) -> dict:
    """
    Applies one ``_load`` directive: reads the referenced file (relative to ``root_path``) and lets the
    remaining keys of ``parent`` override what it defines.
    """
    argument = parent[LOAD_ATTR_NAME]
    path = os.path.join(os.path.dirname(root_path), argument)
    if not os.path.isfile(path):
        raise FileNotFoundError(
            f'Loading configuration from file {argument} failed because this file does not exist. '
            'Paths given to _load are relative to the file containing the directive.'
        )
    with open(path, 'r') as file:
        loaded = yaml.safe_load(file) or {}
    loaded = __resolve_loads(loaded, path)
    local = parent.copy()
    del local[LOAD_ATTR_NAME]
    return __merge(loaded, local)


def __resolve_loads(data: dict, root_path: str) -> dict:
    """Applies every ``_load`` directive in ``data``, including chained and nested ones."""
    while LOAD_ATTR_NAME in data:
        data = __resolve_single_load(data, root_path)
    return {key: __resolve_loads(value, root_path) if isinstance(value, dict) else value
            for key, value in data.items()}


def _join(path: str, key: Any) -> str:
    return f'{path}.{key}' if path else str(key)


def _key_lines(text: str) -> dict[str, int]:
    """1-based line of every mapping key of a YAML document, by dotted path"""
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return {}
    lines: dict[str, int] = {}

    def walk(node: yaml.Node, path: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key_path = _join(path, key_node.value)
                lines[key_path] = key_node.start_mark.line + 1
                walk(value_node, key_path)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                item_path = f'{path}[{i}]'
                lines[item_path] = item.start_mark.line + 1
                walk(item, item_path)

    if root is not None:
        walk(root, '')
    return lines


def parse_angle(value: Union[str, float, int]) -> float:
    """
    Reads an angle given as a number or as a multiple of pi, e.g. ``'pi/3'``, ``'-pi/6'`` or ``'2*pi/5'``.

    Raises:
        ValueError: If the value cannot be read.
    """
    if isinstance(value, bool):
        raise ValueError(f'Not an angle: {value!r}')
    if isinstance(value, (int, float)):
        return float(value)
    match = _PI_ANGLE.match(str(value))
    if match is None:
        try:
            return float(value)
        except ValueError:
            raise ValueError(f'Not an angle: {value!r}') from None
    angle = np.pi * float(match['factor'] or 1.0) / float(match['divisor'] or 1.0)
    return -angle if match['sign'] == '-' else angle


def parse_schedule(value: Union[str, list]) -> list[float]:
    """
    Reads a wavenumber schedule: an explicit list or ``'odd(N)'`` meaning ``1, 3, ..., 2N - 1``.

    Raises:
        ValueError: If the value cannot be read.
    """
    if isinstance(value, str):
        match = _ODD_SCHEDULE.match(value)
        if match is None:
            raise ValueError(f'Schedule must be a list or "odd(N)", got {value!r}')
        return [float(2 * i + 1) for i in range(int(match[1]))]
    if not isinstance(value, list):
        raise ValueError(f'Schedule must be a list or "odd(N)", got {type(value).__name__}')
    return [float(k) for k in value]


@dataclass
class ExperimentConfig:
    """
    A validated description of one experiment: the true profile, the data to synthesize and the
    inversion to run on it.

    Attributes:
        profile (dict): ``{'name': ..., 'params': {...}}`` for a registered closed-form profile or
            ``{'coefficients': [...]}`` for a spline profile on the inversion lattice.
        schedule (list[float]): Strictly increasing positive wavenumbers.
        directions (list[float]): Incidence angles in ``(-pi/2, pi/2)``.
        name (str): Name of the run, used in artifact file names.
        radius (float): Truncation radius ``R``.
        n_f (int): Number of observation intervals.
        delta (float): Relative noise level.
        seed (int): Seed of the noise generator.
        basis_size (int): Number of spline functions ``M``.
        kappa (int): Spline degree.
        rho (float): Relative discrepancy target of every Newton step.
        tau (float): Safety factor of the stopping rule.
        mesh (dict): ``{'threshold': ..., 'small': ..., 'large': ...}`` choosing ``n`` per wavenumber.
        eta_inversion (float): Coupling parameter of the inversion solves. Synthesis always uses ``eta = k``.
        max_iterations (int): Newton iterations allowed per wavenumber.
        delta_floor (float): Noise level assumed for exact data in the stopping rule.
        snapshot_points (int): Number of uniform points profile snapshots are sampled on.
        threads (int): Worker threads of the Jacobian.
        verbose (int): Verbosity level of :mod:`roughsurf.inversion`.
    """
    profile: dict
    schedule: list[float]
    directions: list[float]
    name: str = 'experiment'
    radius: float = 1.0
    n_f: int = 64
    delta: float = 0.0
    seed: int = 0
    basis_size: int = 10
    kappa: int = 4
    rho: float = 0.8
    tau: float = 1.5
    mesh: dict = field(default_factory=lambda: asdict(MeshRule()))
    eta_inversion: float = 0.0
    max_iterations: int = 25
    delta_floor: float = 1e-8
    snapshot_points: int = 401
    threads: int = 1
    verbose: int = 0

    def true_profile(self) -> SurfaceProfile:
        if 'coefficients' in self.profile:
            coefficients = np.asarray(self.profile['coefficients'], dtype=np.float64)
            basis = SplineBasis(len(coefficients), radius=self.radius, kappa=self.profile.get('kappa', self.kappa))
            return basis.profile(coefficients)
        return ClosedFormProfile(self.profile['name'], self.profile.get('params'), radius=self.radius)

    def basis(self) -> SplineBasis:
        return SplineBasis(self.basis_size, radius=self.radius, kappa=self.kappa)

    def mesh_rule(self) -> MeshRule:
        return MeshRule(**self.mesh)

    def settings(self) -> SolverSettings:
        return SolverSettings(eta=self.eta_inversion, mesh_rule=self.mesh_rule(),
                              max_iterations=self.max_iterations, delta_floor=self.delta_floor,
                              threads=self.threads)

    def to_dict(self) -> dict:
        return asdict(self)


_NUMBER_FIELDS = {
    'radius': (float, lambda v: v > 0, 'must be positive'),
    'n_f': (int, lambda v: v >= 1, 'must be at least 1'),
    'delta': (float, lambda v: v >= 0, 'must be non-negative'),
    'seed': (int, lambda v: v >= 0, 'must be non-negative'),
    'basis_size': (int, lambda v: v >= 1, 'must be at least 1'),
    'kappa': (int, lambda v: 2 <= v <= 4, 'must lie in 2..4'),
    'rho': (float, lambda v: 0 < v < 1, 'must lie in (0, 1)'),
    'tau': (float, lambda v: v > 1, 'must exceed 1'),
    'eta_inversion': (float, lambda v: True, ''),
    'max_iterations': (int, lambda v: v >= 1, 'must be at least 1'),
    'delta_floor': (float, lambda v: v > 0, 'must be positive'),
    'snapshot_points': (int, lambda v: v >= 2, 'must be at least 2'),
    'threads': (int, lambda v: v >= 1, 'must be at least 1'),
    'verbose': (int, lambda v: 0 <= v <= 4, 'must lie in 0..4'),
}


def _number(value: Any, kind: type, path: str) -> Union[int, float]:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(f'expected a number, got {value!r}', path)
    if kind is int:
        if float(value) != int(value):
            raise ConfigValidationError(f'expected an integer, got {value!r}', path)
        return int(value)
    return float(value)


def _validate_profile(value: Any) -> dict:
    if isinstance(value, str):
        value = {'name': value}
    if not isinstance(value, dict):
        raise ConfigValidationError('expected a profile name or a mapping', 'profile')
    unknown = set(value) - {'name', 'params', 'coefficients', 'kappa'}
    if unknown:
        raise ConfigValidationError('unknown field', f'profile.{sorted(unknown)[0]}')
    if ('name' in value) == ('coefficients' in value):
        raise ConfigValidationError('give exactly one of "name" and "coefficients"', 'profile')
    if 'name' in value:
        known = {*ClosedFormProfile.profile_functions, *ClosedFormProfile.named_profiles}
        if value['name'] not in known:
            raise ConfigValidationError(f'unknown profile "{value["name"]}", available: {sorted(known)}',
                                        'profile.name')
        if not isinstance(value.get('params', {}), dict):
            raise ConfigValidationError('expected a mapping', 'profile.params')
    else:
        coefficients = value['coefficients']
        if not isinstance(coefficients, list) or len(coefficients) == 0:
            raise ConfigValidationError('expected a non-empty list', 'profile.coefficients')
        for i, coefficient in enumerate(coefficients):
            _number(coefficient, float, f'profile.coefficients[{i}]')
    return dict(value)


def _validate_mesh(value: Any) -> dict:
    if isinstance(value, int) and not isinstance(value, bool):
        value = {'threshold': np.inf, 'small': value, 'large': value}
    if not isinstance(value, dict):
        raise ConfigValidationError('expected a mesh size or a mapping', 'mesh')
    defaults = asdict(MeshRule())
    unknown = set(value) - set(defaults)
    if unknown:
        raise ConfigValidationError('unknown field', f'mesh.{sorted(unknown)[0]}')
    mesh = {**defaults, **value}
    mesh['threshold'] = _number(mesh['threshold'], float, 'mesh.threshold')
    for key in ('small', 'large'):
        mesh[key] = _number(mesh[key], int, f'mesh.{key}')
        if mesh[key] < MIN_MESH_SIZE:
            raise ConfigValidationError(f'must be at least {MIN_MESH_SIZE}', f'mesh.{key}')
    return mesh


def validate_config(data: Any) -> ExperimentConfig:
    """
    Builds an :class:`ExperimentConfig` from raw configuration data.

    Raises:
        ConfigValidationError: On a missing, unknown or invalid field. The error names the dotted path
            of the field.
    """
    if not isinstance(data, dict):
        raise ConfigValidationError('the configuration must be a mapping')
    allowed = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in allowed:
            raise ConfigValidationError('unknown field', str(key))
    for key in ('profile', 'schedule', 'directions'):
        if key not in data:
            raise ConfigValidationError('missing required field', key)

    values: dict[str, Any] = {'profile': _validate_profile(data['profile'])}
    try:
        schedule = parse_schedule(data['schedule'])
    except (TypeError, ValueError) as e:
        raise ConfigValidationError(str(e), 'schedule') from None
    if len(schedule) == 0:
        raise ConfigValidationError('the schedule is empty', 'schedule')
    if schedule[0] <= 0 or any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ConfigValidationError('wavenumbers must be positive and strictly increasing', 'schedule')
    values['schedule'] = schedule

    directions = data['directions'] if isinstance(data['directions'], list) else [data['directions']]
    if len(directions) == 0:
        raise ConfigValidationError('no incident directions', 'directions')
    values['directions'] = []
    for i, direction in enumerate(directions):
        try:
            angle = parse_angle(direction)
        except ValueError as e:
            raise ConfigValidationError(str(e), f'directions[{i}]') from None
        if not abs(angle) < np.pi / 2:
            raise ConfigValidationError('incidence angles must lie in (-pi/2, pi/2)', f'directions[{i}]')
        values['directions'].append(angle)

    if 'name' in data:
        if not isinstance(data['name'], str) or not data['name']:
            raise ConfigValidationError('expected a non-empty string', 'name')
        values['name'] = data['name']
    for key, (kind, check, message) in _NUMBER_FIELDS.items():
        if key in data:
            number = _number(data[key], kind, key)
            if not check(number):
                raise ConfigValidationError(message, key)
            values[key] = number
    if 'mesh' in data:
        values['mesh'] = _validate_mesh(data['mesh'])
    return ExperimentConfig(**values)


def load_experiment_config(path: str, variables: Optional[dict] = None) -> ExperimentConfig:
    """
    Loads an experiment configuration from the specified file.

    A configuration file should be in YAML format (JSON is read as well), with 'experiment.yml' being the
    preferred extension. Property names are the fields of :class:`ExperimentConfig`.

    An example experiment configuration file::

        # example1.experiment.yml
        name: example1
        profile: example1
        schedule: odd(6)
        directions: [pi/3]
        n_f: 64
        delta: 0.03
        seed: 2024
        basis_size: 10
        rho: 0.8
        tau: 1.5

    A file may include another one with ``_load: other.experiment.yml`` and override some of its
    properties, and any value may be a ``$name`` reference filled in from ``variables``.

    Args:
        path: Path to a configuration file.
        variables: Variable values for the configuration file.

    Returns:
        A validated configuration.

    Raises:
        ConfigValidationError: If the configuration is invalid. The error carries the dotted field path
            and, when the field is written in ``path`` itself, its line.
    """
    if variables is None:
        variables = {}
    with open(path, 'r') as file:
        text = file.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise ConfigValidationError(f'not a valid YAML/JSON file: {e}',
                                    line=mark.line + 1 if mark is not None else None) from None
    if not isinstance(data, dict):
        raise ConfigValidationError('the configuration must be a mapping')

    data = __resolve_loads(data, root_path=path)
    try:
        data = __inject(data, variables)
        return validate_config(data)
    except ConfigValidationError as e:
        lines = _key_lines(text)
        line = lines.get(e.field, lines.get(e.field.split('[')[0].split('.')[0])) if e.field else None
        error = ConfigValidationError(e.message, e.field, line)
        _logger.error(f'{path}: {error}')
        raise error from None
