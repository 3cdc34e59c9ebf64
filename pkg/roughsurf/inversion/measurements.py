from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union
import json
import logging
import os

import numpy as np
import numpy.typing as npt

from roughsurf.forward import IncidentWave, assemble, far_field, observation_angles, solve_scattering
from roughsurf.geometry import SurfaceProfile, build_mesh
from roughsurf.utils import SavableLoadable, Stopwatch


_logger = logging.getLogger('roughsurf.inversion')


@dataclass(frozen=True)
class MeshRule:
    """
    Chooses the mesh parameter ``n`` for a wavenumber: ``small`` below ``threshold``, ``large`` otherwise.
    """
    threshold: float = 13.0
    small: int = 128
    large: int = 256

    def __call__(self, k: float) -> int:
        return self.small if k < self.threshold else self.large


MeshSize = Union[MeshRule, Callable[[float], int], int]


def mesh_size(rule: MeshSize, k: float) -> int:
    return int(rule) if isinstance(rule, (int, np.integer)) else int(rule(k))


def _complex_to_json(values: np.ndarray) -> dict:
    return {'re': values.real.tolist(), 'im': values.imag.tolist()}


def _complex_from_json(data: dict) -> np.ndarray:
    return np.array(data['re'], dtype=np.float64) + 1j * np.array(data['im'], dtype=np.float64)


@dataclass
class MeasurementSet(SavableLoadable):
    """
    Far-field data for several wavenumbers and incident directions, sampled at the same observation angles.

    Attributes:
        wavenumbers (numpy.ndarray): Increasing wavenumbers ``k_1 < ... < k_N``.
        thetas (numpy.ndarray): Incidence angles of the directions ``d_l``.
        angles (numpy.ndarray): Observation angles ``j pi / n_f``, ``j = 0..n_f``.
        values (numpy.ndarray): Data of shape ``(N, n_d, n_f + 1)``.
        delta (float): Relative noise level of every ``(k, d)`` block.
        seed (int, optional): Seed the noise was drawn with.
        metadata (dict): Free-form provenance (true profile, coupling and mesh rules, timings).
    """
    file_extension = '.dataset.json'

    wavenumbers: npt.NDArray[np.float64]
    thetas: npt.NDArray[np.float64]
    angles: npt.NDArray[np.float64]
    values: npt.NDArray[np.complex128]
    delta: float = 0.0
    seed: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.wavenumbers = np.asarray(self.wavenumbers, dtype=np.float64)
        self.thetas = np.asarray(self.thetas, dtype=np.float64)
        self.angles = np.asarray(self.angles, dtype=np.float64)
        self.values = np.asarray(self.values, dtype=np.complex128)
        expected = (len(self.wavenumbers), len(self.thetas), len(self.angles))
        if self.values.shape != expected:
            raise ValueError(f'Measurement values have shape {self.values.shape}, expected {expected}.')
        if np.any(np.diff(self.wavenumbers) <= 0):
            raise ValueError('Wavenumbers must be strictly increasing.')
        if self.delta < 0:
            raise ValueError(f'Noise level must be non-negative, got {self.delta}.')

    def index_of(self, k: float) -> int:
        """
        Raises:
            KeyError: If ``k`` is not one of the wavenumbers.
        """
        matches = np.flatnonzero(np.isclose(self.wavenumbers, k, rtol=1e-12, atol=0))
        if len(matches) == 0:
            raise KeyError(f'No measurements for wavenumber {k}.')
        return int(matches[0])

    def block(self, k: float) -> npt.NDArray[np.complex128]:
        """Data for one wavenumber, shape ``(n_d, n_f + 1)``"""
        return self.values[self.index_of(k)]

    def incidents(self, k: float) -> list[IncidentWave]:
        return [IncidentWave(float(k), float(theta)) for theta in self.thetas]

    def to_dict(self) -> dict:
        return {
            'wavenumbers': self.wavenumbers.tolist(),
            'thetas': self.thetas.tolist(),
            'angles': self.angles.tolist(),
            'values': _complex_to_json(self.values),
            'delta': self.delta,
            'seed': self.seed,
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'MeasurementSet':
        return cls(
            wavenumbers=np.array(data['wavenumbers']),
            thetas=np.array(data['thetas']),
            angles=np.array(data['angles']),
            values=_complex_from_json(data['values']),
            delta=data['delta'],
            seed=data.get('seed'),
            metadata=data.get('metadata', {}),
        )

    @classmethod
    def load(cls, path: str) -> 'MeasurementSet':
        """
        Loads a dataset from a JSON file. Complex arrays are stored as ``{"re": [...], "im": [...]}``.

        Args:
            path: Path to a dataset file. '.dataset.json' is appended if the path does not end with '.json'.
        """
        with open(cls.with_extension(path), 'r') as file:
            return cls.from_dict(json.load(file))

    def save(self, path: str) -> str:
        """
        Saves the dataset in JSON format.

        Returns:
            A final (i.e. with an extension), absolute path where the dataset was saved.
        """
        path = self.with_extension(path)
        with open(path, 'w') as file:
            json.dump(self.to_dict(), file)
        return os.path.abspath(path)


def add_noise(values: npt.ArrayLike, delta: float, rng: np.random.Generator) -> npt.NDArray[np.complex128]:
    """
    Perturbs one block by ``delta * zeta * |u| / |zeta|`` with ``zeta`` a complex standard normal vector,
    so the relative perturbation of the block is exactly ``delta``.
    """
    values = np.asarray(values, dtype=np.complex128)
    zeta = rng.standard_normal(values.shape) + 1j * rng.standard_normal(values.shape)
    if delta == 0:
        return values.copy()
    return values + delta * zeta * np.linalg.norm(values) / np.linalg.norm(zeta)


def synthesize_measurements(true_profile: SurfaceProfile,
                            schedule: Sequence[float],
                            directions: Sequence[float],
                            n_f: int,
                            delta: float,
                            seed: Optional[int],
                            n_per_k: MeshSize = MeshRule(),
                            verbose: int = 0,
                            ) -> MeasurementSet:
    """
    Computes far-field data for a known profile and perturbs it with noise.

    The exact fields use the combined layer with ``eta = k`` and the mesh size ``n_per_k(k)``. Noise is
    drawn block by block, wavenumbers outermost, from ``numpy.random.default_rng(seed)``.

    Args:
        true_profile: The profile generating the data.
        schedule: Increasing wavenumbers.
        directions: Incidence angles.
        n_f: Number of observation intervals; the data has ``n_f + 1`` angles including both end points.
        delta: Relative noise level, non-negative.
        seed: Seed of the noise generator.
        n_per_k: Mesh parameter per wavenumber, a callable or a fixed integer.
        verbose: Verbosity level. These are common for the entire module - for information on
            different levels see :mod:`roughsurf.inversion`.

    Raises:
        ValueError: If ``delta < 0`` or the schedule is not increasing.
    """
    if delta < 0:
        raise ValueError(f'Noise level must be non-negative, got {delta}.')
    schedule = np.asarray(schedule, dtype=np.float64)
    angles = observation_angles(n_f)
    exact = np.empty((len(schedule), len(directions), len(angles)), dtype=np.complex128)
    stopwatch = Stopwatch()
    for i, k in enumerate(schedule):
        n = mesh_size(n_per_k, k)
        mesh = build_mesh(true_profile, n)
        system = assemble(mesh, k, k)
        if verbose >= 4:
            _logger.info(f'Synthesis system at k={k}: n={n}, rcond={system.rcond:.3e}')
        for l, theta in enumerate(directions):
            density = solve_scattering(system, IncidentWave(float(k), float(theta)))
            exact[i, l] = far_field(mesh, density, k, k, angles).values
        if verbose >= 2:
            _logger.info(f'Synthesized k={k} ({len(directions)} directions, n={n}).')

    rng = np.random.default_rng(seed)
    noisy = np.empty_like(exact)
    for i in range(len(schedule)):
        for l in range(len(directions)):
            noisy[i, l] = add_noise(exact[i, l], delta, rng)
    wall_time, cpu_time = stopwatch.stop()
    if verbose >= 1:
        _logger.info(f'Synthesized {exact.shape[0] * exact.shape[1]} far-field blocks '
                     f'in {wall_time:.2f} sec (wall), {cpu_time:.2f} sec (CPU).')
    metadata = {
        'true_profile': repr(true_profile),
        'coupling': 'eta = k',
        'mesh_sizes': [mesh_size(n_per_k, k) for k in schedule],
    }
    return MeasurementSet(schedule, np.asarray(directions, dtype=np.float64), angles, noisy,
                          delta=float(delta), seed=seed, metadata=metadata)
