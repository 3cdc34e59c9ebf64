from typing import Optional
import logging

import numpy as np
import numpy.typing as npt

from roughsurf.geometry import SplineProfile, SurfaceProfile, cardinal_bspline


_logger = logging.getLogger('roughsurf.inversion')


def spline_phi(t: npt.ArrayLike, kappa: int = 4) -> npt.NDArray[np.float64]:
    """
    Centred cardinal B-spline of degree ``kappa``, supported on ``[-(kappa+1)/2, (kappa+1)/2]``.

    Examples:
        >>> spline_phi(0.0)
        array(0.59895833)
    """
    return cardinal_bspline(t, kappa)


class SplineBasis:
    """
    ``M`` shifted cardinal splines spanning the admissible profiles::

        phi_i(x1) = phi((x1 - t_i) / step),  step = 2R / (M + 5),  t_i = (i + 2) step - R,  i = 1..M

    Every ``phi_i`` is supported inside ``(-R, R)`` for degrees up to 4.

    Args:
        size: Number of basis functions ``M``.
        radius: Truncation radius ``R``.
        kappa: Spline degree.

    Raises:
        ValueError: If ``size < 1`` or the degree is outside ``2..4``.

    Attributes:
        size (int): Number of basis functions.
        radius (float): Truncation radius.
        kappa (int): Spline degree.
        step (float): Lattice step.
        centers (numpy.ndarray): Spline centres ``t_1 .. t_M``.
    """

    def __init__(self, size: int, radius: float = 1.0, kappa: int = 4) -> None:
        if size < 1:
            raise ValueError(f'A spline basis needs at least one function, got {size}.')
        if not 2 <= kappa <= 4:
            msg = f'Spline degree must lie in 2..4 to keep the basis inside (-R, R), got {kappa}.'
            _logger.error(msg)
            raise ValueError(msg)
        self.size = int(size)
        self.radius = float(radius)
        self.kappa = int(kappa)
        self.step = 2 * self.radius / (self.size + 5)
        self.centers = (np.arange(1, self.size + 1) + 2) * self.step - self.radius

    def values(self, x1: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Basis functions at ``x1``, shape ``(len(x1), M)``"""
        x1 = np.atleast_1d(np.asarray(x1, dtype=np.float64))
        return cardinal_bspline((x1[:, None] - self.centers[None, :]) / self.step, self.kappa)

    def profile(self, coefficients: npt.ArrayLike, base: Optional[SurfaceProfile] = None) -> SplineProfile:
        """The profile ``base + sum_i a_i phi_i``"""
        coefficients = np.asarray(coefficients, dtype=np.float64)
        if coefficients.shape != (self.size,):
            raise ValueError(f'Expected {self.size} coefficients, got shape {coefficients.shape}.')
        return SplineProfile(self.centers, self.step, coefficients, kappa=self.kappa, radius=self.radius,
                             base=base)

    def __repr__(self) -> str:
        return f'SplineBasis(size={self.size}, radius={self.radius}, kappa={self.kappa})'


def profile_from_coeffs(basis: SplineBasis, a: npt.ArrayLike) -> SplineProfile:
    """
    Returns:
        ``h(x1) = sum_i a_i phi((x1 - t_i) / step)`` with analytic derivatives.

    Raises:
        ValueError: If ``len(a)`` differs from the basis size.
    """
    return basis.profile(a)
