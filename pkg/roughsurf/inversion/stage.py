from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Any, Callable, Optional
import json
import logging
import os

import numpy as np
import numpy.typing as npt

from roughsurf.forward import Density, ForwardSystem, IncidentWave, assemble, far_field_matrix, rhs
from roughsurf.frechet import jacobian
from roughsurf.geometry import BoundaryMesh, build_mesh
from roughsurf.utils import SavableLoadable, SingularSystemError, Stopwatch
from .levenberg_marquardt import lm_step
from .measurements import MeasurementSet, MeshRule, MeshSize, mesh_size
from .spline import SplineBasis


_logger = logging.getLogger('roughsurf.inversion')

DEGENERATE_NORM = 1e-14
"""Data blocks with a smaller norm are compared by absolute instead of relative residual."""


@dataclass
class SolverSettings:
    """
    Numerical settings of the inversion.

    Attributes:
        eta (float): Coupling parameter of every forward and derivative solve.
        mesh_rule (MeshRule | Callable | int): Mesh parameter ``n`` per wavenumber.
        max_iterations (int): Newton iterations allowed per wavenumber.
        delta_floor (float): Noise level assumed for exact data when forming the stopping threshold.
        divergence_factor (float): Largest accepted growth of the error between two iterations.
        threads (int): Worker threads for the incident directions.
    """
    eta: float = 0.0
    mesh_rule: MeshSize = field(default_factory=MeshRule)
    max_iterations: int = 25
    delta_floor: float = 1e-8
    divergence_factor: float = 1.5
    threads: int = 1


@dataclass(frozen=True)
class IterationRecord:
    """
    One entry of the iteration log. Iteration 0 of a wavenumber records the starting error only.

    Attributes:
        k (float): Wavenumber.
        iteration (int): Iteration number within the wavenumber.
        err (float): Relative far-field error after the iteration.
        beta (float, optional): Regularization parameter of the step.
        step_norm (float, optional): Norm of the coefficient update.
        attained (bool, optional): Whether the discrepancy equation was solved.
    """
    k: float
    iteration: int
    err: float
    beta: Optional[float] = None
    step_norm: Optional[float] = None
    attained: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class InversionState:
    """
    The evolving reconstruction ``h = sum_i a_i phi_i``.

    Attributes:
        coefficients (numpy.ndarray): Current coefficients.
        stage (int): Index of the wavenumber being processed.
        errors (list[float]): Error after every accepted iteration, across all wavenumbers.
        log (list[IterationRecord]): The iteration log.
    """
    coefficients: npt.NDArray[np.float64]
    stage: int = 0
    errors: list[float] = field(default_factory=list)
    log: list[IterationRecord] = field(default_factory=list)

    @classmethod
    def initial(cls, basis: SplineBasis) -> 'InversionState':
        """The flat initial guess"""
        return cls(coefficients=np.zeros(basis.size))


@dataclass(frozen=True)
class ForwardEvaluation:
    """Everything one forward pass at a wavenumber produces, reused by the derivative."""
    mesh: BoundaryMesh
    system: ForwardSystem
    incidents: list[IncidentWave]
    densities: list[Density]
    predicted: npt.NDArray[np.complex128]


def forward_evaluation(basis: SplineBasis,
                       coefficients: npt.ArrayLike,
                       measurements: MeasurementSet,
                       k: float,
                       settings: SolverSettings,
                       verbose: int = 0,
                       ) -> ForwardEvaluation:
    """
    Solves the forward problem for the spline profile at wavenumber ``k`` for every measured direction.

    Raises:
        SingularSystemError: If the system cannot be factorized.
    """
    mesh = build_mesh(basis.profile(coefficients), mesh_size(settings.mesh_rule, k))
    system = assemble(mesh, k, settings.eta)
    if verbose >= 4:
        _logger.info(f'Forward system at k={k}: n={mesh.n}, rcond={system.rcond:.3e}')
    incidents = measurements.incidents(k)
    values = system.solve(np.column_stack([rhs(mesh, incident) for incident in incidents]))
    densities = [Density(values[:, l], incident) for l, incident in enumerate(incidents)]
    predicted = (far_field_matrix(mesh, k, settings.eta, measurements.angles) @ values).T
    return ForwardEvaluation(mesh, system, incidents, densities, predicted)


def err_k(measurements: MeasurementSet, k: float, predicted: npt.ArrayLike) -> float:
    """
    Mean over the directions of ``|F(h) - data| / |data|`` at wavenumber ``k``.

    Blocks whose data norm is below ``DEGENERATE_NORM`` contribute their absolute residual.

    Args:
        measurements: The data.
        k: A measured wavenumber.
        predicted: Far fields of the current profile, shape ``(n_d, n_f + 1)``.
    """
    measured = measurements.block(k)
    predicted = np.asarray(predicted).reshape(measured.shape)
    residuals = np.linalg.norm(predicted - measured, axis=1)
    norms = np.linalg.norm(measured, axis=1)
    degenerate = norms < DEGENERATE_NORM
    ratios = np.where(degenerate, residuals, residuals / np.where(degenerate, 1.0, norms))
    return float(np.mean(ratios))


def _max_error_predicate(value: float, stats: 'StageStats') -> bool:
    return len(stats.errors) > 0 and stats.errors[-1] <= value


def _max_iterations_predicate(value: int, stats: 'StageStats') -> bool:
    return stats.iterations >= value


def _max_wall_time_predicate(value: float, stats: 'StageStats') -> bool:
    return np.sum(stats.wall_times) >= value


class FrequencyStage:
    """
    Newton iterations at a single wavenumber.

    Args:
        k: The wavenumber. Must be present in the measurements the stage is run with.
        stop_conditions: Conditions deciding when to end the stage. For details see :attr:`stop_predicates`.
        name: Name of the stage. Used in combination with :attr:`output_dir` to generate a save path for the
            stage statistics and in the logs.
        output_dir: Directory the statistics are saved to after the stage finishes or is interrupted. If not
            set, nothing is saved.

    Raises:
        ValueError: If no valid stop conditions were passed.

    Attributes:
        k (float): The wavenumber.
        stats (StageStats): Statistics of the last run.
        name (str, optional): Name of the stage.
        output_dir (str, optional): Where the statistics are saved.

    Examples:
        >>> from roughsurf.inversion import FrequencyStage, InversionState, SolverSettings, SplineBasis
        >>> basis = SplineBasis(10)
        >>> stage = FrequencyStage(k=1.0, stop_conditions={'max_error': 0.045, 'max_iterations': 25})
        >>> state = stage.run(InversionState.initial(basis), measurements, basis, rho=0.8,
        >>>                   settings=SolverSettings(), verbose=3)
    """

    stop_predicates: dict[str, Callable[[Any, 'StageStats'], bool]] = {
        'max_error': _max_error_predicate,
        'max_iterations': _max_iterations_predicate,
        'max_wall_time': _max_wall_time_predicate,
    }
    """
    A class attribute that stores global (i.e. shared by every stage) stop conditions. These are stored as
    functions with the following signature::

        >>> def my_stop_predicate(value, stats: StageStats) -> bool:
        >>>     pass

    where ``value`` is passed in a ``stop_conditions`` dictionary through :class:`FrequencyStage`'s
    constructor. The return value indicates whether the stage should end.

    The default stop predicates are:

    - ``'max_error'`` - the current relative far-field error is at most the value,
    - ``'max_iterations'`` - number of Newton iterations,
    - ``'max_wall_time'`` - elapsed wall time of the iterations.
    """

    def __init__(self,
                 k: float,
                 stop_conditions: dict,
                 name: Optional[str] = None,
                 output_dir: Optional[str] = None,
                 ) -> None:
        self.k = float(k)
        self.__initialised_stop_predicates: dict[str, Callable[..., bool]] = {}
        """Partial functions with stop conditions specified during initialization"""
        for predicate_name, predicate_arg in stop_conditions.items():
            predicate = FrequencyStage.stop_predicates.get(predicate_name)
            if predicate is None:
                _logger.warning(f'"{predicate_name}" is not a known stop condition. '
                                f'Available stop conditions: {list(FrequencyStage.stop_predicates.keys())}')
                continue
            self.__initialised_stop_predicates[predicate_name] = partial(predicate, predicate_arg)
        if len(self.__initialised_stop_predicates) == 0:
            msg = ('stop_conditions dict does not have any valid stop conditions. '
                   'Please provide at least one valid stop condition.')
            _logger.error(msg)
            raise ValueError(msg)
        self.stop_conditions = dict(stop_conditions)
        self.stats = StageStats(self.k)
        self.name = name
        self.output_dir = output_dir

    def run(self,
            state: InversionState,
            measurements: MeasurementSet,
            basis: SplineBasis,
            rho: float,
            settings: Optional[SolverSettings] = None,
            verbose: int = 0,
            ) -> InversionState:
        """
        Iterates ``a <- a + da`` with regularized Newton steps until a stop condition holds.

        A singular forward system ends the stage without changing the coefficients. An error growing by
        more than ``settings.divergence_factor`` reverts the last step and ends the stage. Statistics are
        saved if :attr:`output_dir` is set, also when the run is interrupted by an exception.

        Args:
            state: The state to continue from; it is updated in place and returned.
            measurements: The data.
            basis: The spline basis of the coefficients.
            rho: Relative discrepancy target of every step.
            settings: Numerical settings.
            verbose: Verbosity level. These are common for the entire module - for information on
                different levels see :mod:`roughsurf.inversion`.
        """
        settings = settings if settings is not None else SolverSettings()
        self.stats = StageStats(self.k)
        try:
            self.__iterate(state, measurements, basis, rho, settings, verbose)
        except BaseException:
            if verbose >= 1:
                _logger.info(f'Stage k={self.k} interrupted.')
            self.__handle_stage_terminated(verbose, interrupted=True)
            raise
        if verbose >= 1:
            _logger.info(f'Stage k={self.k} finished ({self.stats.status}) after {self.stats.iterations} '
                         f'iterations with Err={self.stats.final_error:.4e}.')
        self.__handle_stage_terminated(verbose)
        return state

    def __iterate(self,
                  state: InversionState,
                  measurements: MeasurementSet,
                  basis: SplineBasis,
                  rho: float,
                  settings: SolverSettings,
                  verbose: int,
                  ) -> None:
        try:
            evaluation = forward_evaluation(basis, state.coefficients, measurements, self.k, settings, verbose)
        except SingularSystemError as e:
            self.__handle_singular(e)
            return
        error = err_k(measurements, self.k, evaluation.predicted)
        self.stats.record_start(error)
        state.log.append(IterationRecord(self.k, 0, error))
        if verbose >= 3:
            _logger.info(f'k={self.k}: initial Err={error:.4e}')

        while not self.__is_finished():
            stopwatch = Stopwatch()
            try:
                derivative = jacobian(evaluation.system, evaluation.mesh, evaluation.incidents, basis,
                                      measurements.angles, densities=evaluation.densities,
                                      threads=settings.threads)
                residual = (evaluation.predicted - measurements.block(self.k)).ravel()
                step = lm_step(derivative, residual, rho)
                candidate = state.coefficients + step.delta_a
                candidate_evaluation = forward_evaluation(basis, candidate, measurements, self.k, settings,
                                                          verbose)
            except SingularSystemError as e:
                self.__handle_singular(e)
                return
            candidate_error = err_k(measurements, self.k, candidate_evaluation.predicted)
            wall_time, cpu_time = stopwatch.stop()

            if candidate_error > settings.divergence_factor * error:
                _logger.error(f'k={self.k}: Err grew from {error:.4e} to {candidate_error:.4e}; '
                              f'reverting the step and ending the stage.')
                self.stats.status = 'diverged'
                return

            state.coefficients = candidate
            evaluation, error = candidate_evaluation, candidate_error
            state.errors.append(error)
            step_norm = float(np.linalg.norm(step.delta_a))
            record = IterationRecord(self.k, self.stats.iterations + 1, error, step.beta, step_norm, step.attained)
            state.log.append(record)
            self.stats.update(record, wall_time, cpu_time)
            if verbose >= 3:
                _logger.info(f'k={self.k}, iteration {record.iteration}: Err={error:.4e}, '
                             f'beta={step.beta:.3e}, |da|={step_norm:.3e}')
        reason = self.__met_condition()
        self.stats.status = 'converged' if reason == 'max_error' else reason

    def __handle_singular(self, error: SingularSystemError) -> None:
        _logger.error(f'Stage k={self.k} skipped: {error}')
        self.stats.status = 'singular'

    def __met_condition(self) -> Optional[str]:
        """Name of the first stop condition that holds, if any"""
        for name, predicate in self.__initialised_stop_predicates.items():
            if predicate(stats=self.stats):
                return name
        return None

    def __is_finished(self) -> bool:
        return self.__met_condition() is not None

    def __handle_stage_terminated(self, verbose: int, interrupted: bool = False) -> None:
        if self.output_dir is None:
            return
        name = self.name if self.name is not None else f'k{self.k:g}'
        save_path = SavableLoadable.prep_save_file(os.path.join(self.output_dir, name), interrupted)
        stats_path = self.stats.save(save_path)
        if verbose >= 1:
            _logger.info(f"Stage's stats saved to {stats_path}")


class StageStats(SavableLoadable):
    """
    Statistics of one :class:`FrequencyStage` run.

    Attributes:
        k (float): The wavenumber.
        errors (numpy.ndarray): The error before the first iteration followed by the error after every
            accepted iteration.
        betas (numpy.ndarray): Regularization parameters of the accepted steps.
        step_norms (numpy.ndarray): Norms of the accepted coefficient updates.
        wall_times (numpy.ndarray): Wall time of every accepted iteration.
        cpu_times (numpy.ndarray): CPU time of every accepted iteration.
        status (str): How the stage ended: ``'converged'``, ``'max_iterations'``, ``'max_wall_time'``,
            ``'diverged'``, ``'singular'`` or ``'pending'`` before it has.
    """
    file_extension = '.stats.json'

    def __init__(self, k: float) -> None:
        self.k = float(k)
        self.errors = np.array([])
        self.betas = np.array([])
        self.step_norms = np.array([])
        self.wall_times = np.array([])
        self.cpu_times = np.array([])
        self.status = 'pending'

    @property
    def iterations(self) -> int:
        return len(self.betas)

    @property
    def final_error(self) -> float:
        return float(self.errors[-1]) if len(self.errors) else float('nan')

    def record_start(self, error: float) -> None:
        self.errors = np.append(self.errors, error)

    def update(self, record: IterationRecord, wall_time: float, cpu_time: float) -> None:
        """Appends an accepted iteration."""
        self.errors = np.append(self.errors, record.err)
        self.betas = np.append(self.betas, record.beta)
        self.step_norms = np.append(self.step_norms, record.step_norm)
        self.wall_times = np.append(self.wall_times, wall_time)
        self.cpu_times = np.append(self.cpu_times, cpu_time)

    def to_dict(self) -> dict:
        return {
            'k': self.k,
            'errors': self.errors.tolist(),
            'betas': self.betas.tolist(),
            'step_norms': self.step_norms.tolist(),
            'wall_times': self.wall_times.tolist(),
            'cpu_times': self.cpu_times.tolist(),
            'status': self.status,
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'StageStats':
        stats = cls(data['k'])
        stats.errors = np.array(data['errors'])
        stats.betas = np.array(data['betas'])
        stats.step_norms = np.array(data['step_norms'])
        stats.wall_times = np.array(data['wall_times'])
        stats.cpu_times = np.array(data['cpu_times'])
        stats.status = data['status']
        return stats

    @classmethod
    def load(cls, path: str) -> 'StageStats':
        """
        Loads stage statistics from a JSON file. Example file::

            {
                "k": 3.0,
                "errors": [0.41, 0.12, 0.04],
                "betas": [0.52, 0.08],
                "step_norms": [0.31, 0.05],
                "wall_times": [1.9, 1.8],
                "cpu_times": [7.2, 7.0],
                "status": "converged"
            }

        Args:
            path: Path to a stats file. If it does not end with '.json', '.stats.json' is appended.
        """
        with open(cls.with_extension(path), 'r') as file:
            return cls.from_dict(json.load(file))

    def save(self, path: str) -> str:
        """
        Saves the statistics in JSON format.

        Args:
            path: Path where the file will be created. '.stats.json' is appended if the path does not
                end with '.json'.

        Returns:
            A final (i.e. with an extension), absolute path where the statistics were saved.
        """
        path = self.with_extension(path)
        with open(path, 'w') as file:
            json.dump(self.to_dict(), file)
        return os.path.abspath(path)
