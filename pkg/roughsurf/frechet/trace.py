from dataclasses import dataclass
from typing import Callable, Optional, Union
import logging

import numpy as np
import numpy.typing as npt

from roughsurf.forward import (Density, IncidentWave, adjoint_blocks, hypersingular_kernel, kress_weights,
                               nystrom_interpolate, single_layer_blocks)
from roughsurf.geometry import BoundaryMesh, SegmentTag, SurfaceProfile, curve_nodes
from roughsurf.specfun import hankel1


_logger = logging.getLogger('roughsurf.frechet')

STENCIL_SUBDIVISION = 4
"""Tangential derivatives are central differences on the nodes of ``mesh.refine(STENCIL_SUBDIVISION)``."""

_STENCIL_OFFSETS = np.array([-3, -2, -1, 1, 2, 3])
_STENCIL_WEIGHTS = np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60

ProfileIncrement = Union[SurfaceProfile, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class NormalDerivativeTrace:
    """
    Normal derivative of the total field ``u = u^i + u^r + u^s`` on the perturbed segment.

    Attributes:
        indices (numpy.ndarray): Mesh nodes the trace is given at, all on the perturbed segment.
        values (numpy.ndarray): ``du/dnu`` at those nodes, with the upward normal of the mesh.
        incident (IncidentWave): The wave generating the field.
    """
    indices: npt.NDArray[np.int64]
    values: npt.NDArray[np.complex128]
    incident: IncidentWave


def flat_trace(incident: IncidentWave, x1: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """``du/dx2`` on the unperturbed plane, ``-2 i k cos(theta) exp(i k x1 sin(theta))``"""
    x1 = np.asarray(x1, dtype=np.float64)
    return -2j * incident.k * np.cos(incident.theta) * np.exp(1j * incident.k * x1 * np.sin(incident.theta))


def _stencil_params(mesh: BoundaryMesh, indices: np.ndarray) -> np.ndarray:
    """Parameters ``t_i + m pi / (STENCIL_SUBDIVISION n)``, shape ``(len(indices), 6)``"""
    lattice = STENCIL_SUBDIVISION * indices[:, None] + _STENCIL_OFFSETS[None, :]
    return np.pi * (lattice / (STENCIL_SUBDIVISION * mesh.n))


def _differentiate(samples: np.ndarray, mesh: BoundaryMesh) -> np.ndarray:
    return samples @ _STENCIL_WEIGHTS * (STENCIL_SUBDIVISION * mesh.n / np.pi)


def _collocated(params: np.ndarray, mesh: BoundaryMesh, k: float, layer: Callable) -> np.ndarray:
    """Product quadrature matrix ``R(t - t_j) L1 + (pi/n) L2`` of a split kernel at the given parameters"""
    targets = curve_nodes(mesh.profile, params)
    first, second = layer(targets, mesh, k)
    weights = kress_weights(mesh.n, targets.params[:, None] - mesh.params[None, :])
    return weights * first + (np.pi / mesh.n) * second


def _double_layer_trace(mesh: BoundaryMesh,
                        density: Density,
                        k: float,
                        eta: float,
                        indices: np.ndarray,
                        ) -> npt.NDArray[np.complex128]:
    """
    ``d(D phi)/dnu`` at flat nodes, from above.

    Over the perturbed segment the hypersingular operator is rewritten as
    ``d/ds S(dphi/ds) + k^2 nu.S(nu phi)``; integrating by parts there leaves the end values of the density
    at the corners. The arc lies away from the targets and is summed with the plain kernel.
    """
    flat = mesh.flat_indices
    on_flat = np.zeros(mesh.size, dtype=bool)
    on_flat[flat] = True
    phi = density.values

    params = _stencil_params(mesh, flat)
    samples = nystrom_interpolate(mesh, density, k, eta, params.ravel(), refinement=STENCIL_SUBDIVISION)
    tangential = np.zeros(mesh.size, dtype=np.complex128)
    tangential[flat] = _differentiate(samples.reshape(params.shape), mesh) / mesh.speeds[flat]

    params = _stencil_params(mesh, indices)
    shifted = curve_nodes(mesh.profile, params.ravel())
    single = _collocated(params.ravel(), mesh, k, single_layer_blocks)
    potential = single[:, on_flat] @ tangential[on_flat]
    for corner, end_value, sign in ((mesh.n, phi[mesh.n - 1], -1.0), (0, phi[1], 1.0)):
        distance = np.linalg.norm(shifted.points - mesh.points[corner], axis=1)
        potential += sign * 0.25j * hankel1(0, k * distance) * end_value
    tangent_term = _differentiate(potential.reshape(params.shape), mesh) / mesh.speeds[indices]

    single = _collocated(mesh.params[indices], mesh, k, single_layer_blocks)
    normal_products = mesh.normals[indices] @ mesh.normals.T
    normal_term = k ** 2 * (single * normal_products)[:, on_flat] @ phi[on_flat]

    arc = mesh.arc_indices
    kernel = hypersingular_kernel(mesh.points[indices], mesh.normals[indices], mesh, k, columns=arc)
    arc_term = (np.pi / mesh.n) * kernel[:, arc] @ phi[arc]
    return tangent_term + normal_term + arc_term


def normal_derivative(mesh: BoundaryMesh,
                      density: Density,
                      incident: IncidentWave,
                      k: float,
                      eta: float,
                      indices: Optional[npt.ArrayLike] = None,
                      ) -> NormalDerivativeTrace:
    """
    Normal derivative of the total field at nodes of the perturbed segment.

    The scattered part is evaluated on the curve from the combined-layer density,
    ``du^s/dnu = d(D phi)/dnu - i eta (K' phi - phi / 2)``, with the logarithmic singularities integrated by
    the product quadrature of the forward solver. The gradient of ``u^i + u^r`` is added analytically.

    Args:
        mesh: The mesh the density was solved on.
        density: Density of the scattered field for ``incident``.
        incident: The incident wave.
        k: Wavenumber.
        eta: Coupling parameter the density was solved with.
        indices: Nodes to evaluate at. Defaults to every node of the perturbed segment.

    Raises:
        ValueError: If an index is a corner or lies on the arc.
    """
    if indices is None:
        indices = mesh.flat_indices
    indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    if np.any(mesh.tags[indices] != SegmentTag.FLAT):
        msg = f'Normal derivatives are only available inside the perturbed segment, got nodes {indices.tolist()}.'
        _logger.error(msg)
        raise ValueError(msg)
    if density.incident is None:
        density = Density(density.values, incident)

    points = mesh.points[indices]
    gradient = np.sum(incident.total_field_gradient(points) * mesh.normals[indices], axis=1)
    if not np.any(density.values):
        return NormalDerivativeTrace(indices, gradient, incident)

    scattered = _double_layer_trace(mesh, density, k, eta, indices)
    if eta != 0:
        adjoint = _collocated(mesh.params[indices], mesh, k, adjoint_blocks) @ density.values
        scattered = scattered - 1j * eta * (adjoint - 0.5 * density.values[indices])
    return NormalDerivativeTrace(indices, scattered + gradient, incident)


def increment_values(mesh: BoundaryMesh, indices: np.ndarray, delta_h: ProfileIncrement) -> npt.NDArray[np.float64]:
    x1 = mesh.points[indices, 0]
    return np.asarray(delta_h(x1), dtype=np.float64)


def derivative_rhs_block(mesh: BoundaryMesh,
                         trace: NormalDerivativeTrace,
                         increments: npt.ArrayLike,
                         ) -> npt.NDArray[np.complex128]:
    """
    Right-hand sides of the derivative problem for several increments at once.

    Args:
        mesh: The mesh.
        trace: Normal derivative of the total field.
        increments: Increment values at the trace nodes, shape ``(len(trace.indices), m)``.

    Returns:
        ``g'`` of shape ``(2n, m)``.
    """
    increments = np.asarray(increments, dtype=np.float64).reshape(len(trace.indices), -1)
    normal_x2 = mesh.normals[trace.indices, 1]
    block = np.zeros((mesh.size, increments.shape[1]), dtype=np.complex128)
    block[trace.indices] = -2 * (normal_x2 * trace.values)[:, None] * increments
    return block


def derivative_rhs(mesh: BoundaryMesh, trace: NormalDerivativeTrace, delta_h: ProfileIncrement) -> npt.NDArray[np.complex128]:
    """
    Boundary data of the derivative problem, ``g'_i = -2 nu_2(t_i) delta_h(x1(t_i)) du/dnu(t_i)`` at the
    trace nodes and zero elsewhere.
    """
    values = increment_values(mesh, trace.indices, delta_h)
    return derivative_rhs_block(mesh, trace, values[:, None])[:, 0]
