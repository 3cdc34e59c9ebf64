from dataclasses import dataclass, field
from typing import Callable, Optional
import json
import logging
import os

import numpy as np
import numpy.typing as npt
from scipy import integrate

from roughsurf.geometry import SurfaceProfile
from roughsurf.utils import SavableLoadable
from .measurements import MeasurementSet
from .spline import SplineBasis
from .stage import FrequencyStage, InversionState, IterationRecord, SolverSettings, StageStats


_logger = logging.getLogger('roughsurf.inversion')


class FrequencyContinuation:
    """
    Runs :class:`FrequencyStage` instances in order of increasing wavenumber, each warm-started from the
    coefficients the previous one ended with.

    Args:
        stages: Stages to be run, in order.
        output_dir: Directory the stage statistics are saved to. Stages without their own ``output_dir``
            use this one; if both are ``None`` nothing is saved.
        stage_callback: A function called after each stage with the following signature::

                >>> def my_callback(state: InversionState,
                >>>                 stats: StageStats,
                >>>                 stage_id: str,
                >>>                 ) -> None:
                >>>     pass

    Attributes:
        stages (list[FrequencyStage]): Stages to be run.
        output_dir (str, optional): Where stage statistics are saved.

    Examples:
        >>> from roughsurf.inversion import FrequencyContinuation, FrequencyStage, InversionState, SplineBasis
        >>> stages = [FrequencyStage(k, {'max_error': 0.045, 'max_iterations': 25}) for k in (1.0, 3.0, 5.0)]
        >>> continuation = FrequencyContinuation(stages, output_dir='./run/')
        >>> basis = SplineBasis(10)
        >>> state = continuation.run(InversionState.initial(basis), measurements, basis, rho=0.8, verbose=1)
    """

    def __init__(self,
                 stages: list[FrequencyStage],
                 output_dir: Optional[str] = None,
                 stage_callback: Optional[Callable] = None,
                 ) -> None:
        wavenumbers = [stage.k for stage in stages]
        if any(b <= a for a, b in zip(wavenumbers, wavenumbers[1:])):
            raise ValueError(f'Stages must have strictly increasing wavenumbers, got {wavenumbers}.')
        self.stages = stages
        self.output_dir = output_dir
        self.__stage_callback = stage_callback
        if output_dir is not None:
            self.__ensure_stages_savable()

    def __ensure_stages_savable(self) -> None:
        for i, stage in enumerate(self.stages):
            if stage.output_dir is None:
                stage.output_dir = self.output_dir
            if stage.name is None:
                stage.name = self.__get_stage_id(i)

    def run(self,
            state: InversionState,
            measurements: MeasurementSet,
            basis: SplineBasis,
            rho: float,
            settings: Optional[SolverSettings] = None,
            verbose: int = 0,
            ) -> InversionState:
        """
        Runs every stage on the same state.

        Args:
            state: Initial state, updated in place.
            measurements: The data; must contain every stage's wavenumber.
            basis: Spline basis of the coefficients.
            rho: Relative discrepancy target of every step.
            settings: Numerical settings.
            verbose: Verbosity level. These are common for the entire module - for information on
                different levels see :mod:`roughsurf.inversion`.
        """
        total_iterations = 0
        total_wall_time = 0.0
        total_cpu_time = 0.0
        for i, stage in enumerate(self.stages):
            stage_id = self.__get_stage_id(i)
            state.stage = i
            if verbose >= 1:
                _logger.info(f'Running stage {stage_id} (k={stage.k})...')
            stage.run(state, measurements, basis, rho, settings, verbose=verbose)
            total_iterations += stage.stats.iterations
            stage_wall_time = float(np.sum(stage.stats.wall_times))
            stage_cpu_time = float(np.sum(stage.stats.cpu_times))
            total_wall_time += stage_wall_time
            total_cpu_time += stage_cpu_time

            if self.__stage_callback is not None:
                self.__stage_callback(state, stage.stats, stage_id)

            if verbose >= 2:
                _logger.info(f'Stage {stage_id} ended with status "{stage.stats.status}" after '
                             f'{stage.stats.iterations} iterations.')
                _logger.info(f'Final Err: {stage.stats.final_error:.4e}')
                _logger.info(f'Elapsed stage wall time: {stage_wall_time:.2f} sec')
                _logger.info(f'Elapsed stage CPU time: {stage_cpu_time:.2f} sec')
        if verbose >= 1:
            _logger.info(f'Continuation finished after {total_iterations} iterations.')
            _logger.info(f'Elapsed total wall time: {total_wall_time:.2f} sec')
            _logger.info(f'Elapsed total CPU time: {total_cpu_time:.2f} sec')
        return state

    @property
    def stats(self) -> dict[str, StageStats]:
        """Maps stage name/index to the statistics of every stage."""
        return {self.__get_stage_id(i): stage.stats for i, stage in enumerate(self.stages)}

    def __get_stage_id(self, stage_idx: int) -> str:
        """Stage name or the stage's position (1-based) if it has no name"""
        stage = self.stages[stage_idx]
        return str(stage_idx + 1) if stage.name is None else stage.name


def stopping_threshold(delta: float, tau: float, settings: SolverSettings) -> float:
    """``tau * delta``, with ``delta`` replaced by ``settings.delta_floor`` for exact data"""
    if delta == 0:
        _logger.warning(f'Exact data: stopping at tau * delta_floor = {tau * settings.delta_floor:.3e}.')
        return tau * settings.delta_floor
    return tau * delta


def build_continuation(measurements: MeasurementSet,
                       tau: float,
                       settings: SolverSettings,
                       output_dir: Optional[str] = None,
                       stage_callback: Optional[Callable] = None,
                       ) -> FrequencyContinuation:
    """One stage per measured wavenumber, each stopped at ``tau * delta`` or after the iteration cap."""
    threshold = stopping_threshold(measurements.delta, tau, settings)
    stages = [FrequencyStage(k, {'max_error': threshold, 'max_iterations': settings.max_iterations},
                             name=f'k{k:g}')
              for k in measurements.wavenumbers]
    return FrequencyContinuation(stages, output_dir=output_dir, stage_callback=stage_callback)


def invert(measurements: MeasurementSet,
           basis: SplineBasis,
           rho: float,
           tau: float,
           settings: Optional[SolverSettings] = None,
           verbose: int = 0,
           ) -> tuple[npt.NDArray[np.float64], list[IterationRecord]]:
    """
    Reconstructs the profile from multi-frequency far-field data, starting from the flat surface.

    Args:
        measurements: The data.
        basis: Spline basis of the reconstruction.
        rho: Relative discrepancy target in ``(0, 1)``.
        tau: Safety factor of the stopping rule, above 1.
        settings: Numerical settings.
        verbose: Verbosity level.

    Returns:
        The final coefficients and the iteration log.

    Raises:
        ValueError: If ``rho`` or ``tau`` are out of range.
    """
    if not 0 < rho < 1:
        raise ValueError(f'rho must lie in (0, 1), got {rho}.')
    if not tau > 1:
        raise ValueError(f'tau must exceed 1, got {tau}.')
    settings = settings if settings is not None else SolverSettings()
    continuation = build_continuation(measurements, tau, settings)
    state = continuation.run(InversionState.initial(basis), measurements, basis, rho, settings, verbose)
    return state.coefficients, state.log


def profile_error(true_profile: SurfaceProfile,
                  reconstructed: SurfaceProfile,
                  radius: float,
                  points: int = 401,
                  ) -> dict[str, float]:
    """
    Returns:
        ``{'l2': ..., 'max': ...}``, the L2 and maximum norms of the difference of two profiles on
        ``points`` equidistant points of ``[-R, R]``.
    """
    x1 = np.linspace(-radius, radius, points)
    difference = true_profile(x1) - reconstructed(x1)
    return {
        'l2': float(np.sqrt(integrate.trapezoid(difference ** 2, x1))),
        'max': float(np.max(np.abs(difference))),
    }


@dataclass
class Reconstruction(SavableLoadable):
    """
    The result of an inversion run.

    Attributes:
        coefficients (numpy.ndarray): Final spline coefficients.
        basis_size (int): ``M``.
        radius (float): Truncation radius ``R``.
        kappa (int): Spline degree.
        log (list[dict]): The iteration log.
        stage_status (dict[str, str]): How every stage ended.
        metadata (dict): Provenance of the run.
    """
    file_extension = '.reconstruction.json'

    coefficients: npt.NDArray[np.float64]
    basis_size: int
    radius: float
    kappa: int
    log: list[dict] = field(default_factory=list)
    stage_status: dict[str, str] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    @property
    def basis(self) -> SplineBasis:
        return SplineBasis(self.basis_size, radius=self.radius, kappa=self.kappa)

    def profile(self) -> SurfaceProfile:
        return self.basis.profile(self.coefficients)

    def to_dict(self) -> dict:
        return {
            'coefficients': np.asarray(self.coefficients).tolist(),
            'basis_size': self.basis_size,
            'radius': self.radius,
            'kappa': self.kappa,
            'log': self.log,
            'stage_status': self.stage_status,
            'metadata': self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'Reconstruction':
        """Entries other than the fields (e.g. provenance records) are ignored."""
        return cls(
            coefficients=np.array(data['coefficients'], dtype=np.float64),
            basis_size=data['basis_size'],
            radius=data['radius'],
            kappa=data['kappa'],
            log=data.get('log', []),
            stage_status=data.get('stage_status', {}),
            metadata=data.get('metadata', {}),
        )

    @classmethod
    def load(cls, path: str) -> 'Reconstruction':
        """
        Args:
            path: Path to a reconstruction file. '.reconstruction.json' is appended if the path does not
                end with '.json'.
        """
        with open(cls.with_extension(path), 'r') as file:
            return cls.from_dict(json.load(file))

    def save(self, path: str) -> str:
        """
        Returns:
            A final (i.e. with an extension), absolute path where the reconstruction was saved.
        """
        path = self.with_extension(path)
        with open(path, 'w') as file:
            json.dump(self.to_dict(), file)
        return os.path.abspath(path)
