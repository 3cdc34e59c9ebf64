from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence
import logging

import numpy as np
import numpy.typing as npt

from roughsurf.forward import Density, ForwardSystem, IncidentWave, far_field_matrix, solve_scattering
from roughsurf.geometry import BoundaryMesh
from .trace import derivative_rhs_block, normal_derivative


_logger = logging.getLogger('roughsurf.frechet')


class IncrementBasis(Protocol):
    """Anything spanning profile increments by a finite set of real functions of ``x1``."""

    @property
    def size(self) -> int:
        ...

    def values(self, x1: npt.ArrayLike) -> npt.NDArray[np.float64]:
        """Basis functions at ``x1``, shape ``(len(x1), size)``"""
        ...


@dataclass(frozen=True)
class Jacobian:
    """
    Derivative of the far-field map with respect to the coefficients of an increment basis.

    Attributes:
        matrix (numpy.ndarray): Complex matrix with one row per ``(direction, angle)`` pair, directions
            outermost, and one column per basis function.
        k (float): Wavenumber.
        thetas (numpy.ndarray): Incidence angles of the row blocks.
        angles (numpy.ndarray): Observation angles within a block.
    """
    matrix: npt.NDArray[np.complex128]
    k: float
    thetas: npt.NDArray[np.float64]
    angles: npt.NDArray[np.float64]

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def apply(self, coefficients: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """The linearized far-field change ``J @ a``"""
        return self.matrix @ np.asarray(coefficients, dtype=np.float64)


def _direction_block(system: ForwardSystem,
                     mesh: BoundaryMesh,
                     incident: IncidentWave,
                     basis_values: np.ndarray,
                     far_map: np.ndarray,
                     density: Optional[Density],
                     ) -> np.ndarray:
    if density is None or density.incident is None:
        density = solve_scattering(system, incident)
    trace = normal_derivative(mesh, density, incident, system.k, system.eta)
    derivative_densities = system.solve(derivative_rhs_block(mesh, trace, basis_values))
    return far_map @ derivative_densities


def jacobian(system: ForwardSystem,
             mesh: BoundaryMesh,
             incidents: Sequence[IncidentWave],
             basis: IncrementBasis,
             angles: npt.ArrayLike,
             densities: Optional[Sequence[Density]] = None,
             threads: int = 1,
             ) -> Jacobian:
    """
    Assembles the Jacobian of the far-field map at the profile ``mesh`` was built for.

    Every column is the far field of the derivative problem for one basis function; the factorization in
    ``system`` is shared by all columns and directions.

    Args:
        system: Factorized system of the current profile.
        mesh: The mesh of ``system``.
        incidents: Incident waves, all with the wavenumber of ``system``.
        basis: Increment basis, supported inside the perturbed segment.
        angles: Observation angles.
        densities: Already solved densities, one per incident wave.
        threads: Number of worker threads the directions are spread over.

    Raises:
        ValueError: If ``mesh`` does not belong to ``system`` or the densities do not match the waves.
    """
    if mesh.size != system.mesh.size or mesh.profile is not system.mesh.profile:
        raise ValueError('The mesh does not belong to the factorized system.')
    if densities is not None and len(densities) != len(incidents):
        raise ValueError(f'Got {len(densities)} densities for {len(incidents)} incident waves.')
    angles = np.atleast_1d(np.asarray(angles, dtype=np.float64))
    far_map = far_field_matrix(mesh, system.k, system.eta, angles)
    basis_values = basis.values(mesh.points[mesh.flat_indices, 0])
    densities = densities if densities is not None else [None] * len(incidents)

    def block(pair: tuple[IncidentWave, Optional[Density]]) -> np.ndarray:
        return _direction_block(system, mesh, pair[0], basis_values, far_map, pair[1])

    pairs = list(zip(incidents, densities))
    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            blocks = list(executor.map(block, pairs))
    else:
        blocks = [block(pair) for pair in pairs]
    matrix = np.vstack(blocks) if blocks else np.zeros((0, basis.size), dtype=np.complex128)
    _logger.debug(f'Jacobian at k={system.k}: {matrix.shape[0]} rows, {matrix.shape[1]} columns')
    return Jacobian(matrix=matrix, k=system.k, thetas=np.array([w.theta for w in incidents]), angles=angles)
