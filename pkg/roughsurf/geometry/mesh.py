from dataclasses import dataclass, fields
from enum import IntEnum
import logging

import numpy as np
import numpy.typing as npt

from .grading import omega_jet
from .profiles import SurfaceProfile


_logger = logging.getLogger('roughsurf.geometry')

MIN_MESH_SIZE = 8
"""Smallest admissible mesh parameter ``n``."""

_CORNER_NORMAL_B = np.array([1.0, 1.0]) / np.sqrt(2)
_CORNER_NORMAL_A = np.array([-1.0, 1.0]) / np.sqrt(2)


class SegmentTag(IntEnum):
    """Which part of the closed curve a parameter belongs to."""
    CORNER = 0
    FLAT = 1
    ARC = 2


@dataclass(frozen=True)
class CurveNodes:
    """
    The graded parametrization of the closed curve (perturbed segment followed by the lower half-circle)
    evaluated at arbitrary parameters in ``[0, 2 pi)``.

    Attributes:
        params (numpy.ndarray): Parameters ``t``, shape ``(m,)``.
        points (numpy.ndarray): ``x(t)``, shape ``(m, 2)``.
        derivatives (numpy.ndarray): ``x'(t)``, shape ``(m, 2)``.
        second_derivatives (numpy.ndarray): ``x''(t)``, shape ``(m, 2)``.
        speeds (numpy.ndarray): ``|x'(t)|``, zero at the corners.
        normals (numpy.ndarray): Unit normals pointing out of the truncated lower domain, i.e. upwards on the
            perturbed segment and radially outwards on the arc. At the corners, where the speed vanishes,
            the bisector of the one-sided normals is stored.
        tags (numpy.ndarray): :class:`SegmentTag` values.
    """
    params: npt.NDArray[np.float64]
    points: npt.NDArray[np.float64]
    derivatives: npt.NDArray[np.float64]
    second_derivatives: npt.NDArray[np.float64]
    speeds: npt.NDArray[np.float64]
    normals: npt.NDArray[np.float64]
    tags: npt.NDArray[np.int64]

    def __post_init__(self) -> None:
        for field in fields(self):
            getattr(self, field.name).setflags(write=False)

    def __len__(self) -> int:
        return len(self.params)


def curve_nodes(profile: SurfaceProfile, params: npt.ArrayLike) -> CurveNodes:
    """
    Evaluates the graded parametrization of the closed curve at the given parameters.

    Parameters are taken modulo ``2 pi``. ``[0, pi]`` maps to the perturbed segment traversed from
    ``x_B = (R, 0)`` to ``x_A = (-R, 0)``, ``(pi, 2 pi)`` to the lower half-circle.
    """
    s = np.mod(np.atleast_1d(np.asarray(params, dtype=np.float64)), 2 * np.pi)
    radius = profile.radius
    omega, d_omega, d2_omega = omega_jet(s)
    flat = s <= np.pi

    points = np.empty((len(s), 2))
    derivatives = np.empty((len(s), 2))
    second = np.empty((len(s), 2))

    x1 = -2 * radius * omega[flat] / np.pi + radius
    dx1 = -2 * radius * d_omega[flat] / np.pi
    d2x1 = -2 * radius * d2_omega[flat] / np.pi
    h, dh, d2h = profile.evaluate(x1)
    points[flat] = np.column_stack([x1, h])
    derivatives[flat] = np.column_stack([dx1, dh * dx1])
    second[flat] = np.column_stack([d2x1, d2h * dx1 ** 2 + dh * d2x1])

    arc = ~flat
    angle = omega[arc]
    cos, sin = np.cos(angle), np.sin(angle)
    tangent = np.column_stack([-sin, cos])
    radial = np.column_stack([cos, sin])
    points[arc] = radius * radial
    derivatives[arc] = radius * d_omega[arc, None] * tangent
    second[arc] = radius * (d2_omega[arc, None] * tangent - d_omega[arc, None] ** 2 * radial)

    speeds = np.hypot(derivatives[:, 0], derivatives[:, 1])
    tags = np.where(flat, SegmentTag.FLAT, SegmentTag.ARC).astype(np.int64)
    tags[(s == 0) | (s == np.pi)] = SegmentTag.CORNER

    normals = np.empty((len(s), 2))
    moving = speeds > 0
    normals[moving, 0] = derivatives[moving, 1] / speeds[moving]
    normals[moving, 1] = -derivatives[moving, 0] / speeds[moving]
    normals[~moving & (s == 0)] = _CORNER_NORMAL_B
    normals[~moving & (s == np.pi)] = _CORNER_NORMAL_A
    return CurveNodes(s, points, derivatives, second, speeds, normals, tags)


@dataclass(frozen=True)
class BoundaryMesh:
    """
    Graded Nystrom nodes ``t_j = j pi / n``, ``j = 0..2n-1``, on the closed curve.

    Node 0 is the corner ``x_B``, node ``n`` the corner ``x_A``; nodes ``1..n-1`` lie on the perturbed
    segment and ``n+1..2n-1`` on the lower half-circle. Immutable and safe to share between threads.

    Attributes:
        profile (SurfaceProfile): The profile the mesh was built for.
        n (int): Half the number of nodes.
        nodes (CurveNodes): Parametrization data at the nodes.
    """
    profile: SurfaceProfile
    n: int
    nodes: CurveNodes

    @property
    def radius(self) -> float:
        return self.profile.radius

    @property
    def size(self) -> int:
        """Number of nodes, ``2n``"""
        return 2 * self.n

    @property
    def params(self) -> npt.NDArray[np.float64]:
        return self.nodes.params

    @property
    def points(self) -> npt.NDArray[np.float64]:
        return self.nodes.points

    @property
    def derivatives(self) -> npt.NDArray[np.float64]:
        return self.nodes.derivatives

    @property
    def second_derivatives(self) -> npt.NDArray[np.float64]:
        return self.nodes.second_derivatives

    @property
    def speeds(self) -> npt.NDArray[np.float64]:
        return self.nodes.speeds

    @property
    def normals(self) -> npt.NDArray[np.float64]:
        return self.nodes.normals

    @property
    def tags(self) -> npt.NDArray[np.int64]:
        return self.nodes.tags

    @property
    def flat_indices(self) -> npt.NDArray[np.int64]:
        """Nodes on the perturbed segment without its end points"""
        return np.arange(1, self.n)

    @property
    def arc_indices(self) -> npt.NDArray[np.int64]:
        return np.arange(self.n + 1, 2 * self.n)

    @property
    def corner_indices(self) -> npt.NDArray[np.int64]:
        return np.array([0, self.n])

    @property
    def quadrature_indices(self) -> npt.NDArray[np.int64]:
        """Every node but the two corners, whose quadrature weights vanish"""
        return np.concatenate([self.flat_indices, self.arc_indices])

    def refine(self, factor: int) -> 'BoundaryMesh':
        """
        Returns:
            The nested mesh with ``n * factor``; every node of this mesh is a node of the refined one.
        """
        return build_mesh(self.profile, self.n * factor)


def build_mesh(profile: SurfaceProfile, n: int) -> BoundaryMesh:
    """
    Builds the graded mesh with ``2n`` nodes for the given profile.

    Raises:
        ValueError: If ``n < MIN_MESH_SIZE``.
    """
    if int(n) != n or n < MIN_MESH_SIZE:
        msg = f'Mesh parameter n must be an integer of at least {MIN_MESH_SIZE}, got {n}.'
        _logger.error(msg)
        raise ValueError(msg)
    n = int(n)
    # j / n is correctly rounded, so nested meshes share bit-identical parameters
    params = np.pi * (np.arange(2 * n) / n)
    return BoundaryMesh(profile=profile, n=n, nodes=curve_nodes(profile, params))


def reflect(point: npt.ArrayLike) -> npt.NDArray[np.float64]:
    """
    Mirror image ``(x1, -x2)`` of a point, or of every point in an array of shape ``(..., 2)``.
    """
    return np.asarray(point, dtype=np.float64) * np.array([1.0, -1.0])
