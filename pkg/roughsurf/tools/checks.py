from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence
import logging

import numpy as np

from roughsurf.forward import (IncidentWave, assemble, far_field, kernel_blocks, kernel_K2, observation_angles,
                               quad_weights_R, solve_scattering)
from roughsurf.frechet import jacobian
from roughsurf.geometry import ClosedFormProfile, SurfaceProfile, build_mesh, curve_nodes
from roughsurf.inversion import SplineBasis, lm_step, stack_real
from roughsurf.specfun import bessel_j, bessel_y


_logger = logging.getLogger('roughsurf.tools')


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of one invariant check: ``passed`` iff ``value <= threshold``.

    Attributes:
        name (str): Name of the check.
        passed (bool): Whether the invariant holds.
        value (float): The measured discrepancy.
        threshold (float): The largest acceptable discrepancy.
        detail (str): The error message if the check raised.
    """
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ''


@dataclass
class CheckReport:
    results: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def first_failure(self) -> Optional[str]:
        """Name of the earliest failed check; the order of the suite puts lower-level invariants first."""
        return next((result.name for result in self.results if not result.passed), None)

    def to_dict(self) -> dict:
        return {
            'passed': self.passed,
            'first_failure': self.first_failure,
            'checks': [asdict(result) for result in self.results],
        }


def _far_field(profile: SurfaceProfile, n: int, k: float, eta: float, theta: float,
               angles: np.ndarray) -> np.ndarray:
    mesh = build_mesh(profile, n)
    density = solve_scattering(assemble(mesh, k, eta), IncidentWave(k, theta))
    return far_field(mesh, density, k, eta, angles).values


def check_bessel_wronskian() -> tuple[float, float]:
    """``J1 Y0 - J0 Y1 = 2 / (pi z)``, relative"""
    z = np.geomspace(0.01, 1000.0, 200)
    wronskian = bessel_j(1, z) * bessel_y(0, z) - bessel_j(0, z) * bessel_y(1, z)
    expected = 2 / (np.pi * z)
    return float(np.max(np.abs(wronskian - expected) / expected)), 1e-10


def check_quadrature_weights() -> tuple[float, float]:
    """The logarithmic weights annihilate constants and reproduce ``-(2 pi / m) cos(m t)``"""
    n = 16
    weights = quad_weights_R(n)
    params = np.pi * np.arange(2 * n) / n
    matrix = weights[np.abs(np.arange(2 * n)[:, None] - np.arange(2 * n)[None, :])]
    errors = [np.max(np.abs(matrix.sum(axis=1)))]
    for m in range(1, n):
        errors.append(np.max(np.abs(matrix @ np.cos(m * params) + (2 * np.pi / m) * np.cos(m * params))))
    return float(max(errors)), 1e-10


def check_k2_diagonal_limit() -> tuple[float, float]:
    """Diagonal of the smooth kernel against its two-sided limit, relative"""
    mesh = build_mesh(ClosedFormProfile('example1'), 32)
    k, eta, eps = 2.0, 2.0, 1e-4
    errors = []
    for j in (9, 16, 24, 40, 52):
        t = mesh.params[j]
        _, k2, _ = kernel_blocks(curve_nodes(mesh.profile, [t - eps, t + eps]), mesh, k, eta)
        diagonal = kernel_K2(mesh, k, eta, j, j)
        errors.append(abs(0.5 * (k2[0, j] + k2[1, j]) - diagonal) / max(1.0, abs(diagonal)))
    return float(max(errors)), 1e-6


def check_flat_null() -> tuple[float, float]:
    """The unperturbed plane scatters nothing"""
    angles = observation_angles(16)
    values = [np.max(np.abs(_far_field(ClosedFormProfile('flat'), n, k, eta, theta, angles)))
              for n in (32, 128) for k, eta, theta in [(1.0, 0.0, 0.0), (5.0, 5.0, np.pi / 3), (2.0, 1.0, -0.4)]]
    return float(max(values)), 1e-12


def check_mirror_symmetry() -> tuple[float, float]:
    """A symmetric profile under normal incidence has a symmetric far field, relative to its maximum"""
    angles = observation_angles(32)
    values = _far_field(ClosedFormProfile('example4', {'amplitude': 0.0}), 64, 5.0, 0.0, 0.0, angles)
    return float(np.max(np.abs(values - values[::-1])) / np.max(np.abs(values))), 1e-8


def check_self_convergence() -> tuple[float, float]:
    """Far fields at ``n = 128`` and ``n = 512`` for ``k = 5``, relative"""
    angles = observation_angles(32)
    profile = ClosedFormProfile('example1')
    coarse = _far_field(profile, 128, 5.0, 5.0, np.pi / 3, angles)
    fine = _far_field(profile, 512, 5.0, 5.0, np.pi / 3, angles)
    return float(np.linalg.norm(coarse - fine) / np.linalg.norm(fine)), 1e-6


def check_coupling_independence() -> tuple[float, float]:
    """The scattered field does not depend on the coupling parameter, relative"""
    angles = observation_angles(32)
    profile = ClosedFormProfile('example1')
    combined = _far_field(profile, 256, 2.0, 2.0, 0.2, angles)
    double = _far_field(profile, 256, 2.0, 0.0, 0.2, angles)
    return float(np.linalg.norm(combined - double) / np.linalg.norm(combined)), 1e-6


def check_jacobian_finite_differences() -> tuple[float, float]:
    """Jacobian columns against central differences of the far-field map at ``k = 1`` and ``k = 5``, relative"""
    profile = ClosedFormProfile('example1')
    basis = SplineBasis(10)
    angles = observation_angles(16)
    n, theta, epsilon = 128, np.pi / 3, 1e-4
    mesh = build_mesh(profile, n)
    errors = []
    for k, columns in [(1.0, (2, 5, 7)), (5.0, (1, 4, 8))]:
        derivative = jacobian(assemble(mesh, k, k), mesh, [IncidentWave(k, theta)], basis, angles)
        for column in columns:
            direction = np.zeros(basis.size)
            direction[column] = epsilon
            plus = _far_field(basis.profile(direction, base=profile), n, k, k, theta, angles)
            minus = _far_field(basis.profile(-direction, base=profile), n, k, k, theta, angles)
            difference = (plus - minus) / (2 * epsilon)
            errors.append(np.linalg.norm(difference - derivative.matrix[:, column])
                          / np.linalg.norm(derivative.matrix[:, column]))
    return float(max(errors)), 1e-3


def check_lm_discrepancy() -> tuple[float, float]:
    """The regularized step meets ``|J da + r| = rho |r|``, checked through the normal equations"""
    rng = np.random.default_rng(0)
    rho = 0.8
    errors = []
    for _ in range(100):
        matrix = rng.standard_normal((10, 4)) + 1j * rng.standard_normal((10, 4))
        residual = matrix @ rng.standard_normal(4) + 0.01 * (rng.standard_normal(10) + 1j * rng.standard_normal(10))
        step = lm_step(matrix, residual, rho)
        a, b = stack_real(matrix), stack_real(residual)
        delta_a = np.linalg.solve(a.T @ a + step.beta * np.eye(4), -a.T @ b)
        errors.append(abs(np.linalg.norm(a @ delta_a + b) - rho * np.linalg.norm(b)) / np.linalg.norm(b))
    return float(max(errors)), 1e-8


CHECKS: dict[str, Callable[[], tuple[float, float]]] = {
    'bessel_wronskian': check_bessel_wronskian,
    'quadrature_weights': check_quadrature_weights,
    'k2_diagonal_limit': check_k2_diagonal_limit,
    'flat_null': check_flat_null,
    'mirror_symmetry': check_mirror_symmetry,
    'self_convergence': check_self_convergence,
    'coupling_independence': check_coupling_independence,
    'jacobian_finite_differences': check_jacobian_finite_differences,
    'lm_discrepancy': check_lm_discrepancy,
}
"""
The invariant suite in the order it runs. Every check returns ``(value, threshold)``. Checks of the
building blocks come before the checks built on them, so the first failure points at the broken layer.
"""


def run_checks(names: Optional[Sequence[str]] = None) -> CheckReport:
    """
    Runs the invariant suite, or the named subset of it in suite order. A check that raises counts as
    failed.

    Raises:
        ValueError: If a name is not a known check.
    """
    if names is not None:
        unknown = set(names) - set(CHECKS)
        if unknown:
            raise ValueError(f'Unknown checks {sorted(unknown)}. Available checks: {list(CHECKS)}')
    report = CheckReport()
    for name, check in CHECKS.items():
        if names is not None and name not in names:
            continue
        try:
            value, threshold = check()
        except Exception as e:
            _logger.exception(f'Check "{name}" raised.')
            report.results.append(CheckResult(name, False, float('nan'), float('nan'), detail=repr(e)))
            continue
        passed = bool(np.isfinite(value) and value <= threshold)
        if not passed:
            _logger.error(f'Check "{name}" failed: {value:.3e} > {threshold:.1e}')
        report.results.append(CheckResult(name, passed, value, threshold))
    return report
