from typing import Union

import numpy as np
import numpy.typing as npt

from roughsurf.utils.errors import DomainError


GRADING_POWER = 4
"""Exponent ``p`` of the substitution; ``omega`` has ``p - 1`` vanishing derivatives at the corners."""

RealArg = Union[float, npt.NDArray[np.float64]]


def _check_range(s: np.ndarray, upper: float) -> None:
    if not np.all(np.isfinite(s)) or np.any(s < 0) or np.any(s > upper):
        raise DomainError(f'Grading parameter must lie in [0, {upper:.6g}].')


def _unwrap(values: np.ndarray):
    return values.item() if values.ndim == 0 else values


def _v_jet(s: np.ndarray, p: int = GRADING_POWER) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``v``, ``v'`` and ``v''`` on ``[0, pi]``"""
    c = 1 / p - 0.5
    u = (np.pi - 2 * s) / np.pi
    du = -2 / np.pi
    v = c * u ** 3 - u / p + 0.5
    dv = (3 * c * u ** 2 - 1 / p) * du
    d2v = 6 * c * u * du ** 2
    return v, dv, d2v


def grading_v(s: RealArg) -> RealArg:
    """
    The cubic ``v(s) = (1/p - 1/2)((pi - 2s)/pi)^3 + (1/p)(2s - pi)/pi + 1/2`` with ``p = 4``.

    Raises:
        DomainError: If ``s`` lies outside ``[0, pi]``.
    """
    s_arr = np.asarray(s, dtype=np.float64)
    _check_range(s_arr, np.pi)
    return _unwrap(_v_jet(s_arr)[0])


def omega_jet(s: RealArg) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    The graded substitution ``omega`` with its first and second derivatives on ``[0, 2 pi]``.

    On ``[0, pi]`` ``omega = pi a / (a + b)`` with ``a = v(s)^p`` and ``b = v(pi - s)^p = (1 - v(s))^p``;
    on ``(pi, 2 pi]`` it is shifted by ``pi``.

    Raises:
        DomainError: If ``s`` lies outside ``[0, 2 pi]``.
    """
    s_arr = np.asarray(s, dtype=np.float64)
    _check_range(s_arr, 2 * np.pi)
    upper = s_arr > np.pi
    local = np.where(upper, s_arr - np.pi, s_arr)

    p = GRADING_POWER
    v, dv, d2v = _v_jet(local, p)
    w = 1 - v
    a = v ** p
    b = w ** p
    da = p * v ** (p - 1) * dv
    db = -p * w ** (p - 1) * dv
    d2a = p * (p - 1) * v ** (p - 2) * dv ** 2 + p * v ** (p - 1) * d2v
    d2b = p * (p - 1) * w ** (p - 2) * dv ** 2 - p * w ** (p - 1) * d2v

    total = a + b
    cross = da * b - a * db
    omega = np.pi * a / total + np.where(upper, np.pi, 0.0)
    d_omega = np.pi * cross / total ** 2
    d2_omega = np.pi * ((d2a * b - a * d2b) / total ** 2 - 2 * cross * (da + db) / total ** 3)
    return omega, d_omega, d2_omega


def grading_omega(s: RealArg) -> tuple[RealArg, RealArg]:
    """
    Returns:
        ``(omega(s), omega'(s))`` for ``s`` in ``[0, 2 pi]``.

    Raises:
        DomainError: If ``s`` lies outside ``[0, 2 pi]``.
    """
    omega, d_omega, _ = omega_jet(s)
    return _unwrap(np.asarray(omega)), _unwrap(np.asarray(d_omega))
