from typing import Union

import numpy as np
import numpy.typing as npt
from scipy import special

from roughsurf.utils.errors import DomainError


RealArg = Union[float, npt.NDArray[np.float64]]

_BESSEL_J = {0: special.j0, 1: special.j1}
_BESSEL_Y = {0: special.y0, 1: special.y1}


def _check_order(order: int) -> None:
    if order not in (0, 1):
        raise DomainError(f'Only orders 0 and 1 are supported, got {order}.')


def _as_argument(z: RealArg, strictly_positive: bool) -> np.ndarray:
    z_arr = np.asarray(z, dtype=np.float64)
    if not np.all(np.isfinite(z_arr)):
        raise DomainError('Bessel functions require finite arguments.')
    if strictly_positive and np.any(z_arr <= 0):
        raise DomainError('Functions of the second kind are singular for z <= 0.')
    if not strictly_positive and np.any(z_arr < 0):
        raise DomainError('Negative arguments are not supported.')
    return z_arr


def _unwrap(values: np.ndarray):
    return values.item() if values.ndim == 0 else values


def bessel_j(order: int, z: RealArg) -> RealArg:
    """
    Bessel function of the first kind ``J_order(z)`` for ``z >= 0``.

    Args:
        order: 0 or 1.
        z: A non-negative finite number or an array of them.

    Returns:
        A float for scalar input, an array of the same shape otherwise.

    Raises:
        DomainError: For an unsupported order, a negative or a non-finite argument.
    """
    _check_order(order)
    return _unwrap(_BESSEL_J[order](_as_argument(z, strictly_positive=False)))


def bessel_y(order: int, z: RealArg) -> RealArg:
    """
    Bessel function of the second kind ``Y_order(z)`` for ``z > 0``.

    Raises:
        DomainError: For an unsupported order, ``z <= 0`` or a non-finite argument.
    """
    _check_order(order)
    return _unwrap(_BESSEL_Y[order](_as_argument(z, strictly_positive=True)))


def hankel1(order: int, z: RealArg) -> Union[complex, npt.NDArray[np.complex128]]:
    """
    Hankel function of the first kind ``H_order^(1)(z) = J_order(z) + i Y_order(z)`` for ``z > 0``.

    This is the only entry point the Helmholtz kernels use, so swapping the special
    function backend only touches this module.

    Raises:
        DomainError: Propagated from :func:`bessel_y`.
    """
    _check_order(order)
    z_arr = _as_argument(z, strictly_positive=True)
    values = _BESSEL_J[order](z_arr) + 1j * _BESSEL_Y[order](z_arr)
    return _unwrap(values)
