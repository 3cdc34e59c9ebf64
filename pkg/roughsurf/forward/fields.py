from dataclasses import dataclass
from typing import Optional, Union
import logging

import numpy as np
import numpy.typing as npt

from roughsurf.geometry import BoundaryMesh, CurveNodes, curve_nodes
from roughsurf.utils.errors import CoincidentPointsError
from .kernels import combined_kernel, kernel_blocks
from .quadrature import kress_weights
from .system import Density, nystrom_interpolate


_logger = logging.getLogger('roughsurf.forward')

POTENTIAL_REFINEMENT = 8
"""Default factor by which the quadrature of the layer potentials is refined."""

NEAR_FIELD_SPACINGS = 4.0
"""Points nearer to the curve than this many local spacings of the summation nodes are treated as near."""

_POINT_CHUNK = 256
_FOOT_ITERATIONS = 8


@dataclass(frozen=True)
class FarFieldPattern:
    """
    Far-field pattern sampled at observation directions ``(cos t, sin t)`` of the upper half-plane.

    Attributes:
        angles (numpy.ndarray): Observation angles in ``[0, pi]``, strictly increasing.
        values (numpy.ndarray): Complex far-field values.
    """
    angles: npt.NDArray[np.float64]
    values: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        angles = np.asarray(self.angles, dtype=np.float64)
        values = np.asarray(self.values, dtype=np.complex128)
        if angles.shape != values.shape or angles.ndim != 1:
            raise ValueError(f'Angles {angles.shape} and values {values.shape} must be matching vectors.')
        _check_angles(angles)
        if not np.all(np.isfinite(values)):
            raise ValueError('Far-field values must be finite.')
        object.__setattr__(self, 'angles', angles)
        object.__setattr__(self, 'values', values)

    def __len__(self) -> int:
        return len(self.angles)


def _check_angles(angles: np.ndarray) -> None:
    if np.any(angles < 0) or np.any(angles > np.pi):
        raise ValueError('Observation angles must lie in [0, pi].')
    if np.any(np.diff(angles) <= 0):
        raise ValueError('Observation angles must be strictly increasing.')


def observation_angles(count: int) -> npt.NDArray[np.float64]:
    """``count + 1`` equidistant angles ``j pi / count`` covering both end points"""
    if count < 1:
        raise ValueError(f'Need at least one angle interval, got {count}.')
    return np.pi * (np.arange(count + 1) / count)


def far_field_matrix(mesh: BoundaryMesh, k: float, eta: float, angles: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """
    Linear map from nodal densities to far-field values, shape ``(len(angles), 2n)``::

        F[i, j] = e^{-i pi/4} / sqrt(8 pi k) (pi / n) [k nu(t_j).x_i + eta] e^{-i k x_i.x(t_j)} |x'(t_j)|

    Corner columns vanish with the speed.
    """
    angles = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    _check_angles(angles)
    directions = np.column_stack([np.cos(angles), np.sin(angles)])
    projection = directions @ mesh.normals.T
    phase = np.exp(-1j * k * (directions @ mesh.points.T))
    prefactor = np.exp(-0.25j * np.pi) / np.sqrt(8 * np.pi * k) * (np.pi / mesh.n)
    return prefactor * (k * projection + eta) * phase * mesh.speeds[None, :]


def far_field(mesh: BoundaryMesh, density: Density, k: float, eta: float, angles: npt.ArrayLike) -> FarFieldPattern:
    """Far-field pattern of the combined-layer potential with the given density."""
    angles = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    return FarFieldPattern(angles, far_field_matrix(mesh, k, eta, angles) @ density.values)


def refined_density(mesh: BoundaryMesh,
                    density: Density,
                    k: float,
                    eta: float,
                    refinement: int = POTENTIAL_REFINEMENT,
                    ) -> tuple[BoundaryMesh, npt.NDArray[np.complex128]]:
    """
    Returns:
        The nested mesh refined by ``refinement`` and the density interpolated onto it. Without a
        recorded incident wave the density cannot be interpolated and the original mesh is returned.
    """
    if density.incident is None or refinement == 1:
        return mesh, density.values
    fine = mesh.refine(refinement)
    return fine, nystrom_interpolate(mesh, density, k, eta, fine.params, refinement=refinement)


def side_of(normal: npt.ArrayLike, offset: npt.ArrayLike) -> float:
    """``1.0`` if ``offset`` points to the side of ``normal``, else ``-1.0``; tangential offsets count as ``1.0``"""
    return 1.0 if float(np.dot(normal, offset)) >= 0 else -1.0


def foot_parameter(mesh: BoundaryMesh, point: npt.ArrayLike, start: float, max_step: float) -> float:
    """
    Parameter of the curve point nearest to ``point``, found by Newton's method on ``(x(t) - point).x'(t)``
    from ``start``. Steps are clipped to ``max_step``.
    """
    point = np.asarray(point, dtype=np.float64)
    t = float(start)
    for _ in range(_FOOT_ITERATIONS):
        nodes = curve_nodes(mesh.profile, [t])
        diff = nodes.points[0] - point
        slope = nodes.speeds[0] ** 2 + diff @ nodes.second_derivatives[0]
        if not slope > 0:
            break
        step = float(np.clip((diff @ nodes.derivatives[0]) / slope, -max_step, max_step))
        t -= step
        if abs(step) < 1e-15:
            break
    return float(np.mod(t, 2 * np.pi))


def _boundary_limit(mesh: BoundaryMesh,
                    density: Density,
                    k: float,
                    eta: float,
                    foot: CurveNodes,
                    fallback: complex,
                    side: float,
                    ) -> complex:
    """
    One-sided limit of the potential at the curve point ``foot`` from the side ``side * normal``.
    ``fallback`` stands in for the density at the foot when no incident wave is recorded.
    """
    if density.incident is None:
        value = fallback
    else:
        value = nystrom_interpolate(mesh, density, k, eta, foot.params)[0]
    k1, k2, _ = kernel_blocks(foot, mesh, k, eta)
    weights = kress_weights(mesh.n, foot.params[:, None] - mesh.params[None, :])
    boundary_value = ((weights * k1 + (np.pi / mesh.n) * k2) @ density.values)[0]
    return complex(side * 0.5 * value + boundary_value)


def _near_value(mesh: BoundaryMesh,
                density: Density,
                k: float,
                eta: float,
                fine: BoundaryMesh,
                fine_values: np.ndarray,
                point: np.ndarray,
                node: int,
                ) -> complex:
    """
    The potential at a point near the curve. Within ``NEAR_FIELD_SPACINGS`` local spacings of its foot
    point it is interpolated quadratically along the normal between the boundary limit and two samples
    one and two reaches away.
    """
    param = foot_parameter(mesh, point, fine.params[node], np.pi / fine.n)
    foot = curve_nodes(mesh.profile, [param])
    offset = point - foot.points[0]
    distance = float(np.hypot(*offset))
    if distance < 1e-12:
        msg = 'Potential requested on the curve.'
        _logger.error(msg)
        raise CoincidentPointsError(msg)
    reach = NEAR_FIELD_SPACINGS * foot.speeds[0] * np.pi / fine.n
    if distance >= reach:
        return complex((np.pi / fine.n) * (combined_kernel(point, fine, k, eta) @ fine_values)[0])

    side = side_of(foot.normals[0], offset)
    nearest = int(np.argmin(np.abs(np.mod(fine.params - param + np.pi, 2 * np.pi) - np.pi)))
    limit = _boundary_limit(mesh, density, k, eta, foot, fine_values[nearest], side)
    samples = foot.points[0] + side * reach * np.outer([1.0, 2.0], foot.normals[0])
    outer = (np.pi / fine.n) * (combined_kernel(samples, fine, k, eta) @ fine_values)
    rho = distance / reach
    return complex(0.5 * (rho - 1) * (rho - 2) * limit - rho * (rho - 2) * outer[0]
                   + 0.5 * rho * (rho - 1) * outer[1])


def potential_eval(mesh: BoundaryMesh,
                   density: Density,
                   k: float,
                   eta: float,
                   point: npt.ArrayLike,
                   refinement: int = POTENTIAL_REFINEMENT,
                   refined: Optional[tuple[BoundaryMesh, np.ndarray]] = None,
                   ) -> Union[complex, npt.NDArray[np.complex128]]:
    """
    Evaluates ``u^s = D phi - i eta S phi`` off the curve.

    The potentials are summed with the trapezoidal rule on the nested mesh refined by ``refinement``,
    onto which the density is carried by Nystrom interpolation. A point closer to the curve than
    ``NEAR_FIELD_SPACINGS`` local spacings of the refined nodes is projected onto the curve; its value
    interpolates between the one-sided boundary limit at the foot point and two samples further out
    along the normal.

    Args:
        mesh: The mesh the density was solved on.
        density: The density.
        k: Wavenumber.
        eta: Coupling parameter.
        point: A point of shape ``(2,)`` or several of shape ``(m, 2)``.
        refinement: Refinement factor of the summation mesh.
        refined: The result of :func:`refined_density` for this density, to reuse it across calls.

    Returns:
        A complex number for a single point, otherwise an array of shape ``(m,)``.

    Raises:
        CoincidentPointsError: If a point lies on the curve.
    """
    point = np.asarray(point, dtype=np.float64)
    single = point.ndim == 1
    points = np.atleast_2d(point)

    fine, fine_values = refined if refined is not None else refined_density(mesh, density, k, eta, refinement)
    spacing = fine.speeds * np.pi / fine.n
    values = np.empty(len(points), dtype=np.complex128)
    for start in range(0, len(points), _POINT_CHUNK):
        chunk = points[start:start + _POINT_CHUNK]
        diff = chunk[:, None, :] - fine.points[None, :, :]
        distances = np.hypot(diff[..., 0], diff[..., 1])
        nearest = np.argmin(distances, axis=1)
        nearest_distance = distances[np.arange(len(chunk)), nearest]
        if np.any(nearest_distance < 1e-12):
            msg = 'Potential requested on the curve.'
            _logger.error(msg)
            raise CoincidentPointsError(msg)
        # the reach is measured at the foot point, so screen generously
        local_spacing = np.maximum.reduce([spacing[nearest - 1], spacing[nearest], spacing[(nearest + 1) % fine.size]])
        near = nearest_distance < 2 * NEAR_FIELD_SPACINGS * local_spacing
        far = ~near
        if np.any(far):
            kernel = combined_kernel(chunk[far], fine, k, eta)
            values[start:start + _POINT_CHUNK][far] = (np.pi / fine.n) * (kernel @ fine_values)
        for local in np.flatnonzero(near):
            values[start + local] = _near_value(mesh, density, k, eta, fine, fine_values, chunk[local],
                                                nearest[local])
    return complex(values[0]) if single else values
