from abc import ABC, abstractmethod
from typing import Callable, Optional
import logging
import math

import numpy as np
import numpy.typing as npt
from scipy import special


_logger = logging.getLogger('roughsurf.geometry')

ProfileJet = tuple[npt.NDArray[np.float64], npt.NDArray[np.float64], npt.NDArray[np.float64]]


def cardinal_bspline(t: npt.ArrayLike, kappa: int = 4, derivative: int = 0) -> npt.NDArray[np.float64]:
    """
    Centred cardinal B-spline of degree ``kappa`` (or one of its derivatives), built from truncated powers::

        phi(t) = sum_{j=0}^{kappa+1} (-1)^j / kappa! * C(kappa+1, j) * (t + (kappa+1)/2 - j)_+^kappa

    The support is ``[-(kappa+1)/2, (kappa+1)/2]``; values outside it are exactly zero.

    Args:
        t: Evaluation points.
        kappa: Degree, at least 1.
        derivative: Order of the derivative, 0 to ``kappa``.

    Raises:
        ValueError: For an invalid degree or derivative order.
    """
    if kappa < 1:
        raise ValueError(f'Spline degree must be at least 1, got {kappa}.')
    if not 0 <= derivative <= kappa:
        raise ValueError(f'Derivative order must lie in [0, {kappa}], got {derivative}.')
    t = np.asarray(t, dtype=np.float64)
    half_width = (kappa + 1) / 2
    power = kappa - derivative
    j = np.arange(kappa + 2)
    weights = (-1.0) ** j * special.comb(kappa + 1, j) / math.factorial(power)
    shifted = t[..., None] + half_width - j
    if power == 0:
        truncated = (shifted > 0).astype(np.float64)
    else:
        truncated = np.where(shifted > 0, shifted, 0.0) ** power
    values = truncated @ weights
    return np.where(np.abs(t) < half_width, values, 0.0)


class SurfaceProfile(ABC):
    """
    The graph ``x2 = h(x1)`` of a local perturbation of the plane ``x2 = 0``.

    Implementations must vanish together with their first derivative outside ``(-R, R)``.

    Attributes:
        radius (float): Truncation radius ``R``.
    """

    def __init__(self, radius: float = 1.0) -> None:
        if radius <= 0:
            raise ValueError(f'Truncation radius must be positive, got {radius}.')
        self.radius = float(radius)

    @abstractmethod
    def evaluate(self, x1: npt.ArrayLike) -> ProfileJet:
        """
        Returns:
            ``(h, h', h'')`` at ``x1``, each with the shape of ``x1``.
        """
        pass

    def __call__(self, x1: npt.ArrayLike) -> npt.NDArray[np.float64]:
        return self.evaluate(x1)[0]

    def check_support(self, tol: float = 1e-12) -> None:
        """
        Verifies ``h(+-R) = h'(+-R) = 0``.

        Raises:
            ValueError: If the profile does not vanish at the truncation radius.
        """
        h, dh, _ = self.evaluate(np.array([-self.radius, self.radius]))
        if np.max(np.abs(h)) > tol or np.max(np.abs(dh)) > tol:
            msg = (f'Profile is not supported inside (-{self.radius}, {self.radius}): '
                   f'|h(+-R)| = {np.max(np.abs(h)):.3e}, |h\'(+-R)| = {np.max(np.abs(dh)):.3e}')
            _logger.error(msg)
            raise ValueError(msg)


def _flat_profile(x1: np.ndarray) -> ProfileJet:
    zeros = np.zeros_like(x1)
    return zeros, zeros.copy(), zeros.copy()


def _spline_bump_profile(x1: np.ndarray,
                         amplitude: float = 1.0,
                         center: float = 0.0,
                         width: float = 1.0,
                         kappa: int = 4) -> ProfileJet:
    t = (x1 - center) / width
    return (amplitude * cardinal_bspline(t, kappa),
            amplitude * cardinal_bspline(t, kappa, derivative=1) / width,
            amplitude * cardinal_bspline(t, kappa, derivative=2) / width ** 2)


def _envelope_profile(x1: np.ndarray,
                      offset: float = 0.0,
                      amplitude: float = 1.0,
                      frequency: float = 1.0,
                      width: float = 0.8) -> ProfileJet:
    # exp(1 / ((x/width)^2 - 1)) inside |x| < width, zero outside
    inside = np.abs(x1) < width
    q = np.where(inside, (x1 / width) ** 2, 0.0)
    dq = 2 * x1 / width ** 2
    d2q = 2 / width ** 2
    with np.errstate(over='ignore', divide='ignore', invalid='ignore'):
        gap = q - 1
        g = 1 / gap
        dg = -dq / gap ** 2
        d2g = -d2q / gap ** 2 + 2 * dq ** 2 / gap ** 3
        envelope = np.where(inside, np.exp(g), 0.0)
        live = envelope > 0
        d_envelope = np.where(live, envelope * dg, 0.0)
        d2_envelope = np.where(live, envelope * (d2g + dg ** 2), 0.0)

    phase = frequency * np.pi * x1
    carrier = offset + amplitude * np.sin(phase)
    d_carrier = amplitude * frequency * np.pi * np.cos(phase)
    d2_carrier = -amplitude * (frequency * np.pi) ** 2 * np.sin(phase)
    return (envelope * carrier,
            d_envelope * carrier + envelope * d_carrier,
            d2_envelope * carrier + 2 * d_envelope * d_carrier + envelope * d2_carrier)


class ClosedFormProfile(SurfaceProfile):
    """
    A profile given by a named closed-form expression.

    Args:
        name: A key of :attr:`profile_functions` or of :attr:`named_profiles`.
        params: Keyword parameters of the expression. For named profiles they override the stored ones.
        radius: Truncation radius ``R``.

    Raises:
        ValueError: If the name is unknown.

    Examples:
        >>> from roughsurf.geometry import ClosedFormProfile
        >>> bump = ClosedFormProfile('spline_bump', {'center': -0.2, 'width': 0.3})
        >>> same_bump = ClosedFormProfile('example1')
    """

    profile_functions: dict[str, Callable[..., ProfileJet]] = {
        'flat': _flat_profile,
        'spline_bump': _spline_bump_profile,
        'envelope': _envelope_profile,
    }
    """
    Available expressions. These are stored as functions with the following signature::

        >>> def my_profile(x1: np.ndarray, **params) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        >>>     pass

    returning ``(h, h', h'')``. The defaults are:

    - ``'flat'`` - the unperturbed plane,
    - ``'spline_bump'`` - ``amplitude * phi((x1 - center) / width)`` with the cardinal spline ``phi``,
    - ``'envelope'`` - ``exp(1 / ((x1/width)^2 - 1)) * (offset + amplitude * sin(frequency * pi * x1))``
      for ``|x1| < width`` and zero elsewhere.
    """

    named_profiles: dict[str, tuple[str, dict]] = {
        'example1': ('spline_bump', {'amplitude': 1.0, 'center': -0.2, 'width': 0.3}),
        'example2': ('spline_bump', {'amplitude': -0.8, 'center': 0.3, 'width': 0.2}),
        'example3': ('envelope', {'offset': 0.0, 'amplitude': 1.0, 'frequency': 4.0}),
        'example4': ('envelope', {'offset': 0.5, 'amplitude': 0.1, 'frequency': 16.0}),
    }
    """Named parameter sets of :attr:`profile_functions` entries used by the experiment recipes."""

    def __init__(self, name: str, params: Optional[dict] = None, radius: float = 1.0) -> None:
        super().__init__(radius)
        if name in self.named_profiles:
            kind, stored_params = self.named_profiles[name]
            params = {**stored_params, **(params or {})}
        else:
            kind = name
        if kind not in self.profile_functions:
            msg = (f'"{name}" is not a known profile. Available profiles: '
                   f'{sorted([*self.profile_functions.keys(), *self.named_profiles.keys()])}')
            _logger.error(msg)
            raise ValueError(msg)
        self.name = name
        self.kind = kind
        self.params = dict(params or {})
        self.__function = self.profile_functions[kind]

    def evaluate(self, x1: npt.ArrayLike) -> ProfileJet:
        x1 = np.asarray(x1, dtype=np.float64)
        return self.__function(x1, **self.params)

    def __repr__(self) -> str:
        return f'ClosedFormProfile({self.name!r}, {self.params!r}, radius={self.radius})'


class SplineProfile(SurfaceProfile):
    """
    A linear combination of shifted and scaled cardinal splines, optionally added to a base profile::

        h(x1) = h_base(x1) + sum_i a_i * phi((x1 - centers_i) / step)

    Args:
        centers: Spline centres.
        step: Lattice step, i.e. the scale of every spline.
        coefficients: One real coefficient per centre.
        kappa: Spline degree.
        radius: Truncation radius ``R``.
        base: Optional profile the splines perturb.

    Raises:
        ValueError: If ``centers`` and ``coefficients`` differ in length.
    """

    def __init__(self,
                 centers: npt.ArrayLike,
                 step: float,
                 coefficients: npt.ArrayLike,
                 kappa: int = 4,
                 radius: float = 1.0,
                 base: Optional[SurfaceProfile] = None,
                 ) -> None:
        super().__init__(radius)
        if kappa < 2:
            raise ValueError(f'Spline profiles need a degree of at least 2, got {kappa}.')
        self.centers = np.asarray(centers, dtype=np.float64)
        self.coefficients = np.asarray(coefficients, dtype=np.float64)
        if self.centers.shape != self.coefficients.shape:
            raise ValueError(f'Got {len(self.coefficients)} coefficients for {len(self.centers)} splines.')
        self.step = float(step)
        self.kappa = kappa
        self.base = base

    def evaluate(self, x1: npt.ArrayLike) -> ProfileJet:
        x1 = np.asarray(x1, dtype=np.float64)
        t = (x1[..., None] - self.centers) / self.step
        h = cardinal_bspline(t, self.kappa) @ self.coefficients
        dh = cardinal_bspline(t, self.kappa, derivative=1) @ self.coefficients / self.step
        d2h = cardinal_bspline(t, self.kappa, derivative=2) @ self.coefficients / self.step ** 2
        if self.base is not None:
            base_h, base_dh, base_d2h = self.base.evaluate(x1)
            h, dh, d2h = h + base_h, dh + base_dh, d2h + base_d2h
        return h, dh, d2h

    def __repr__(self) -> str:
        base = f', base={self.base!r}' if self.base is not None else ''
        return (f'SplineProfile(centers={self.centers.tolist()}, step={self.step!r}, '
                f'coefficients={self.coefficients.tolist()}, kappa={self.kappa}, radius={self.radius}{base})')
