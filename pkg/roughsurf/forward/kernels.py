"""
Kernels of the parametrized combined-layer operator and their splitting into a logarithmic and a
smooth part. For a target ``x = x(t)`` and a source node ``y = x(t_j)``::

    K(t, t_j)  = [dPhi_k(x, y)/dnu(y) - i eta Phi_k(x, y)] |x'(t_j)|
    K1(t, t_j) = -(1/4 pi) [k J1(k r) nu(y).(x - y) / r - i eta J0(k r)] |x'(t_j)|
    K2(t, t_j) = K(t, t_j) - K1(t, t_j) ln(4 sin^2((t - t_j)/2))
    K3(t, t_j) = K evaluated with x replaced by its mirror image (x1, -x2)

with ``Phi_k(x, y) = (i/4) H0(k |x - y|)``. The single layer and the adjoint double layer, which the
normal derivative of the scattered field needs on the curve, are split the same way. Block functions return
arrays of shape
``(targets, 2n)`` whose two corner columns are zero, since the corner speeds vanish.
"""
from typing import Optional

import numpy as np
import numpy.typing as npt

from roughsurf.geometry import BoundaryMesh, CurveNodes, SegmentTag, reflect
from roughsurf.specfun import bessel_j, hankel1
from roughsurf.utils.errors import CoincidentPointsError


EULER_GAMMA = np.euler_gamma
"""Euler's constant as used by the diagonal of the smooth single-layer part."""


def _pair_geometry(sources: np.ndarray,
                   mesh: BoundaryMesh,
                   columns: np.ndarray,
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distances ``r``, normal projections ``nu(y).(x - y)`` and source speeds"""
    diff = sources[:, None, :] - mesh.points[None, columns, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    normals = mesh.normals[columns]
    dot = diff[..., 0] * normals[:, 0] + diff[..., 1] * normals[:, 1]
    return r, dot, mesh.speeds[columns]


def _combined(r: np.ndarray, dot: np.ndarray, speed: np.ndarray, k: float, eta: float) -> np.ndarray:
    """``K`` for strictly positive distances"""
    kr = k * r
    double = 0.25j * k * hankel1(1, kr) * dot / r
    single = 0.25j * hankel1(0, kr)
    return (double - 1j * eta * single) * speed[None, :]


def _combined_checked(sources: np.ndarray, mesh: BoundaryMesh, columns: np.ndarray,
                      k: float, eta: float) -> np.ndarray:
    r, dot, speed = _pair_geometry(sources, mesh, columns)
    if np.any(r == 0):
        raise CoincidentPointsError('Kernel requested at coincident source and target points.')
    return _combined(r, dot, speed, k, eta)


def _curvature_diagonal(targets: CurveNodes, rows: np.ndarray) -> np.ndarray:
    """Common limit of the double-layer kernel and its adjoint, times the speed"""
    d1 = targets.derivatives[rows]
    d2 = targets.second_derivatives[rows]
    speed = targets.speeds[rows]
    return (d1[:, 1] * d2[:, 0] - d1[:, 0] * d2[:, 1]) / (4 * np.pi * speed ** 2)


def _single_diagonal(targets: CurveNodes, rows: np.ndarray, k: float) -> np.ndarray:
    speed = targets.speeds[rows]
    return (0.25j - EULER_GAMMA / (2 * np.pi) - np.log(k * speed / 2) / (2 * np.pi)) * speed


def _diagonal_k2(targets: CurveNodes, rows: np.ndarray, k: float, eta: float) -> np.ndarray:
    """Limit of ``K2(t, t_j)`` as ``t_j -> t`` for the targets listed in ``rows``"""
    return _curvature_diagonal(targets, rows) - 1j * eta * _single_diagonal(targets, rows, k)


def _split_geometry(targets: CurveNodes, mesh: BoundaryMesh):
    """Offsets, coinciding pairs, differences ``x - y``, safe distances and ``ln(4 sin^2(tau/2))``"""
    columns = mesh.quadrature_indices
    tau = targets.params[:, None] - mesh.params[None, columns]
    tau = np.mod(tau + np.pi, 2 * np.pi) - np.pi
    same = np.abs(tau) < 1e-14
    diff = targets.points[:, None, :] - mesh.points[None, columns, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    if np.any((r == 0) & ~same):
        raise CoincidentPointsError('Distinct curve parameters map to the same point.')
    with np.errstate(divide='ignore'):
        log_factor = np.where(same, 0.0, np.log(4 * np.sin(tau / 2) ** 2))
    return columns, same, diff, np.where(same, 1.0, r), log_factor


def _full_blocks(targets: CurveNodes, mesh: BoundaryMesh, columns: np.ndarray, *blocks: np.ndarray) -> tuple:
    result = []
    for block in blocks:
        full = np.zeros((len(targets), mesh.size), dtype=np.complex128)
        full[:, columns] = block
        result.append(full)
    return tuple(result)


def kernel_blocks(targets: CurveNodes,
                  mesh: BoundaryMesh,
                  k: float,
                  eta: float,
                  ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Evaluates ``K1``, ``K2`` and ``K3`` between targets on the curve and every node of ``mesh``.

    Args:
        targets: Curve points the kernels are collocated at.
        mesh: Source nodes.
        k: Wavenumber.
        eta: Coupling parameter.

    Returns:
        ``(K1, K2, K3)``, complex arrays of shape ``(len(targets), 2n)``. Rows of ``K3`` belonging to
        targets off the arc are zero.

    Raises:
        CoincidentPointsError: If distinct parameters map to the same point.
    """
    columns, same, diff, safe_r, log_factor = _split_geometry(targets, mesh)
    normals = mesh.normals[columns]
    dot = diff[..., 0] * normals[:, 0] + diff[..., 1] * normals[:, 1]
    speed = mesh.speeds[columns]

    kernel = _combined(safe_r, dot, speed, k, eta)
    kr = k * safe_r
    k1 = -(k * bessel_j(1, kr) * dot / safe_r - 1j * eta * bessel_j(0, kr)) * speed[None, :] / (4 * np.pi)
    k1 = np.where(same, 1j * eta * speed[None, :] / (4 * np.pi), k1)
    k2 = kernel - k1 * log_factor
    rows, cols = np.nonzero(same)
    if len(rows):
        k2[rows, cols] = _diagonal_k2(targets, rows, k, eta)

    k3 = np.zeros_like(k1)
    arc_rows = np.flatnonzero(targets.tags == SegmentTag.ARC)
    if len(arc_rows):
        k3[arc_rows] = _combined_checked(reflect(targets.points[arc_rows]), mesh, columns, k, eta)

    return _full_blocks(targets, mesh, columns, k1, k2, k3)


def single_layer_blocks(targets: CurveNodes, mesh: BoundaryMesh, k: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Splitting of the parametrized single-layer kernel ``S(t, t_j) = Phi_k(x, y) |x'(t_j)|`` into
    ``S1 ln(4 sin^2((t - t_j)/2)) + S2`` with ``S1 = -(1/4 pi) J0(k r) |x'(t_j)|``.

    Returns:
        ``(S1, S2)`` of shape ``(len(targets), 2n)`` with zero corner columns.

    Raises:
        CoincidentPointsError: If distinct parameters map to the same point.
    """
    columns, same, _, r, log_factor = _split_geometry(targets, mesh)
    speed = mesh.speeds[columns][None, :]
    kr = k * r
    s1 = np.where(same, -speed / (4 * np.pi), -bessel_j(0, kr) * speed / (4 * np.pi))
    s2 = 0.25j * hankel1(0, kr) * speed - s1 * log_factor
    rows, cols = np.nonzero(same)
    if len(rows):
        s2[rows, cols] = _single_diagonal(targets, rows, k)
    return _full_blocks(targets, mesh, columns, s1, s2)


def adjoint_blocks(targets: CurveNodes, mesh: BoundaryMesh, k: float) -> tuple[np.ndarray, np.ndarray]:
    """
    Splitting of ``dPhi_k(x, y)/dnu(x) |x'(t_j)|``, the kernel of the adjoint double-layer operator, with
    the logarithmic coefficient ``(1/4 pi) k J1(k r) nu(x).(x - y) / r |x'(t_j)|``.

    Returns:
        ``(A1, A2)`` of shape ``(len(targets), 2n)`` with zero corner columns.

    Raises:
        CoincidentPointsError: If distinct parameters map to the same point.
    """
    columns, same, diff, r, log_factor = _split_geometry(targets, mesh)
    speed = mesh.speeds[columns][None, :]
    normals = targets.normals
    dot = diff[..., 0] * normals[:, 0, None] + diff[..., 1] * normals[:, 1, None]
    kr = k * r
    kernel = -0.25j * k * hankel1(1, kr) * dot / r * speed
    a1 = np.where(same, 0.0, k * bessel_j(1, kr) * dot / r * speed / (4 * np.pi))
    a2 = kernel - a1 * log_factor
    rows, cols = np.nonzero(same)
    if len(rows):
        a2[rows, cols] = _curvature_diagonal(targets, rows)
    return _full_blocks(targets, mesh, columns, a1, a2)


def hypersingular_kernel(points: npt.ArrayLike,
                         normals: npt.ArrayLike,
                         mesh: BoundaryMesh,
                         k: float,
                         columns: Optional[npt.ArrayLike] = None,
                         ) -> np.ndarray:
    """
    ``d^2 Phi_k(x, y)/dnu(x) dnu(y) |x'(t_j)|`` for points ``x`` away from the source nodes ``columns``
    (every node but the corners by default), shape ``(m, 2n)`` with the remaining columns zero::

        (i k / 4) [(k H0(k r) - 2 H1(k r) / r) nu(x).d nu(y).d / r^2 + H1(k r) nu(x).nu(y) / r]

    with ``d = x - y``.

    Raises:
        CoincidentPointsError: If a point coincides with a node.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    normals = np.atleast_2d(np.asarray(normals, dtype=np.float64))
    columns = mesh.quadrature_indices if columns is None else np.asarray(columns, dtype=np.int64)
    diff = points[:, None, :] - mesh.points[None, columns, :]
    r = np.hypot(diff[..., 0], diff[..., 1])
    if np.any(r == 0):
        raise CoincidentPointsError('Kernel requested at coincident source and target points.')
    source_normals = mesh.normals[columns]
    target_dot = diff[..., 0] * normals[:, 0, None] + diff[..., 1] * normals[:, 1, None]
    source_dot = diff[..., 0] * source_normals[None, :, 0] + diff[..., 1] * source_normals[None, :, 1]
    normal_dot = normals @ source_normals.T
    kr = k * r
    h0, h1 = hankel1(0, kr), hankel1(1, kr)
    kernel = 0.25j * k * ((k * h0 - 2 * h1 / r) * target_dot * source_dot / r ** 2 + h1 * normal_dot / r)
    full = np.zeros((len(points), mesh.size), dtype=np.complex128)
    full[:, columns] = kernel * mesh.speeds[columns][None, :]
    return full


def _single_target(mesh: BoundaryMesh, i: int, j: int) -> CurveNodes:
    if j in (0, mesh.n):
        raise ValueError(f'Node {j} is a corner and carries no quadrature weight.')
    nodes = mesh.nodes
    return CurveNodes(*(np.array(getattr(nodes, name)[[i]]) for name in
                        ('params', 'points', 'derivatives', 'second_derivatives', 'speeds', 'normals', 'tags')))


def kernel_K(mesh: BoundaryMesh, k: float, eta: float, i: int, j: int) -> complex:
    """
    Combined-layer kernel ``K(t_i, t_j)``.

    Raises:
        CoincidentPointsError: If ``x(t_i) = x(t_j)``.
        ValueError: If ``j`` is a corner.
    """
    _single_target(mesh, i, j)
    return complex(_combined_checked(mesh.points[[i]], mesh, np.array([j]), k, eta)[0, 0])


def kernel_K1(mesh: BoundaryMesh, k: float, eta: float, i: int, j: int) -> complex:
    """Logarithmic coefficient ``K1(t_i, t_j)``; at ``i = j`` its limit ``(i eta / 4 pi)|x'(t_i)|``."""
    return complex(kernel_blocks(_single_target(mesh, i, j), mesh, k, eta)[0][0, j])


def kernel_K2(mesh: BoundaryMesh, k: float, eta: float, i: int, j: int) -> complex:
    """Smooth remainder ``K2(t_i, t_j)``; at ``i = j`` its analytic limit."""
    return complex(kernel_blocks(_single_target(mesh, i, j), mesh, k, eta)[1][0, j])


def kernel_K3(mesh: BoundaryMesh, k: float, eta: float, i: int, j: int) -> complex:
    """
    Reflected kernel ``K3(t_i, t_j)`` for an arc node ``i``.

    Raises:
        ValueError: If ``i`` is not an arc node or ``j`` is a corner.
        CoincidentPointsError: If the mirrored target touches the curve.
    """
    _single_target(mesh, i, j)
    if mesh.tags[i] != SegmentTag.ARC:
        raise ValueError(f'Node {i} is not on the arc.')
    return complex(_combined_checked(reflect(mesh.points[[i]]), mesh, np.array([j]), k, eta)[0, 0])


def combined_kernel(points: npt.ArrayLike, mesh: BoundaryMesh, k: float, eta: float) -> np.ndarray:
    """
    ``K(x, t_j)`` for arbitrary points ``x`` off the curve, shape ``(m, 2n)`` with zero corner columns.

    Raises:
        CoincidentPointsError: If a point coincides with a node.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    columns = mesh.quadrature_indices
    full = np.zeros((len(points), mesh.size), dtype=np.complex128)
    full[:, columns] = _combined_checked(points, mesh, columns, k, eta)
    return full
