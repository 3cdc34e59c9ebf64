from dataclasses import dataclass
from typing import Union
import logging

import numpy as np
import numpy.typing as npt
from scipy import linalg, optimize

from roughsurf.frechet import Jacobian


_logger = logging.getLogger('roughsurf.inversion')

DISCREPANCY_TOLERANCE = 1e-8
"""Relative accuracy to which the linearized residual matches ``rho * |r|``."""

_BRACKET_EXPANSIONS = 60


@dataclass(frozen=True)
class LMStep:
    """
    A regularized Gauss-Newton update.

    Attributes:
        delta_a (numpy.ndarray): Real coefficient update.
        beta (float): Regularization parameter; 0 when the discrepancy could not be attained.
        linearized_residual (float): ``|J delta_a + r|``.
        target (float): ``rho * |r|``.
        attained (bool): Whether ``beta`` solves the discrepancy equation. If not, ``delta_a`` is the
            minimum-norm least-squares solution.
    """
    delta_a: npt.NDArray[np.float64]
    beta: float
    linearized_residual: float
    target: float
    attained: bool

    @property
    def unattainable(self) -> bool:
        return not self.attained


def stack_real(matrix: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """``[Re A; Im A]``, turning a complex system in real unknowns into a real one"""
    matrix = np.asarray(matrix)
    return np.concatenate([matrix.real, matrix.imag], axis=0)


def lm_step(jacobian: Union[Jacobian, npt.ArrayLike], residual: npt.ArrayLike, rho: float) -> LMStep:
    """
    Minimizes ``|J da + r|^2 + beta |da|^2`` over real ``da`` with ``beta`` chosen such that
    ``|J da(beta) + r| = rho |r|``.

    The complex system is stacked into real and imaginary parts and diagonalized by an SVD, which turns the
    discrepancy equation into a scalar equation increasing in ``beta``; it is solved by Brent's method in
    ``log(beta)``.

    Args:
        jacobian: Complex Jacobian ``J``, or a :class:`roughsurf.frechet.Jacobian`.
        residual: ``r = F(a) - data``, ordered like the rows of ``J``.
        rho: Relative discrepancy target in ``(0, 1)``.

    Returns:
        The step. If even the Gauss-Newton step leaves a residual above ``rho |r|``, the minimum-norm
        least-squares step with ``beta = 0`` is returned and flagged as not attained.

    Raises:
        ValueError: If ``rho`` is outside ``(0, 1)``, the shapes disagree or ``J`` is not finite.
    """
    if not 0 < rho < 1:
        raise ValueError(f'rho must lie in (0, 1), got {rho}.')
    matrix = jacobian.matrix if isinstance(jacobian, Jacobian) else np.asarray(jacobian)
    residual = np.asarray(residual)
    if matrix.ndim != 2 or matrix.shape[0] != residual.shape[0]:
        raise ValueError(f'Jacobian of shape {matrix.shape} does not match a residual of shape {residual.shape}.')
    if not np.all(np.isfinite(matrix)):
        raise ValueError('Jacobian contains non-finite entries.')

    a = stack_real(matrix)
    b = stack_real(residual)
    norm_b = float(np.linalg.norm(b))
    columns = a.shape[1]
    if norm_b == 0:
        return LMStep(np.zeros(columns), 0.0, 0.0, 0.0, True)
    target = rho * norm_b

    u, sigma, vt = linalg.svd(a, full_matrices=False)
    c = u.T @ b
    rank_tol = sigma[0] * max(a.shape) * np.finfo(np.float64).eps if len(sigma) else 0.0
    live = sigma > rank_tol
    outside = max(norm_b ** 2 - float(c @ c), 0.0)

    def residual_norm(beta: float) -> float:
        damping = np.where(live, beta / (sigma ** 2 + beta), 1.0)
        return float(np.sqrt(outside + np.sum((damping * c) ** 2)))

    def step(beta: float) -> np.ndarray:
        with np.errstate(divide='ignore', invalid='ignore'):
            gain = np.where(live, sigma / (sigma ** 2 + beta), 0.0)
        return -vt.T @ (gain * c)

    gauss_newton = float(np.sqrt(outside + np.sum(c[~live] ** 2)))
    if gauss_newton >= target:
        _logger.warning(f'Discrepancy {rho} unattainable: Gauss-Newton residual {gauss_newton:.3e} '
                        f'exceeds {target:.3e}. Using the minimum-norm least-squares step.')
        return LMStep(step(0.0), 0.0, gauss_newton, target, False)

    def discrepancy(log_beta: float) -> float:
        return residual_norm(np.exp(log_beta)) - target

    scale = np.log(sigma[live][0] ** 2)
    low, high = scale - 10.0, scale + 10.0
    for _ in range(_BRACKET_EXPANSIONS):
        if discrepancy(low) < 0:
            break
        low -= 10.0
    for _ in range(_BRACKET_EXPANSIONS):
        if discrepancy(high) > 0:
            break
        high += 10.0
    log_beta = optimize.brentq(discrepancy, low, high, xtol=1e-14, rtol=4 * np.finfo(np.float64).eps)
    beta = float(np.exp(log_beta))
    achieved = residual_norm(beta)
    if abs(achieved - target) > DISCREPANCY_TOLERANCE * norm_b:
        _logger.warning(f'Discrepancy equation solved to {abs(achieved - target) / norm_b:.2e} only.')
    return LMStep(step(beta), beta, achieved, target, True)
