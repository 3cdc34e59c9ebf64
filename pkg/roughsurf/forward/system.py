from dataclasses import dataclass, field
from typing import Optional
import logging

import numpy as np
import numpy.typing as npt
from scipy import linalg

from roughsurf.geometry import BoundaryMesh, CurveNodes, SegmentTag, curve_nodes
from roughsurf.utils.errors import SingularSystemError
from .kernels import kernel_blocks
from .quadrature import kress_weights


_logger = logging.getLogger('roughsurf.forward')

SINGULAR_RCOND = 1e-13
"""Systems with a smaller estimated reciprocal condition number are reported as singular."""

_ROW_CHUNK = 1024


@dataclass(frozen=True)
class IncidentWave:
    """
    Plane wave ``u^i(x) = exp(i k x.d)`` with direction ``d = (sin theta, -cos theta)``.

    Attributes:
        k (float): Wavenumber, positive.
        theta (float): Incidence angle in ``(-pi/2, pi/2)``.
    """
    k: float
    theta: float

    def __post_init__(self) -> None:
        if not self.k > 0:
            raise ValueError(f'Wavenumber must be positive, got {self.k}.')
        if not abs(self.theta) < np.pi / 2:
            raise ValueError(f'Incidence angle must lie in (-pi/2, pi/2), got {self.theta}.')

    @property
    def direction(self) -> npt.NDArray[np.float64]:
        return np.array([np.sin(self.theta), -np.cos(self.theta)])

    def field(self, points: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Incident wave at points of shape ``(..., 2)``"""
        points = np.asarray(points, dtype=np.float64)
        return np.exp(1j * self.k * (points[..., 0] * np.sin(self.theta) - points[..., 1] * np.cos(self.theta)))

    def reflected_field(self, points: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Wave reflected by the unperturbed plane, ``-exp(i k (x1 sin theta + x2 cos theta))``"""
        points = np.asarray(points, dtype=np.float64)
        return -np.exp(1j * self.k * (points[..., 0] * np.sin(self.theta) + points[..., 1] * np.cos(self.theta)))

    def total_field(self, points: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """``u^i + u^r``, which vanishes on the plane ``x2 = 0``"""
        return self.field(points) + self.reflected_field(points)

    def total_field_gradient(self, points: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """Gradient of ``u^i + u^r``, shape ``(..., 2)``"""
        sin, cos = np.sin(self.theta), np.cos(self.theta)
        incident = self.field(points)[..., None] * np.array([sin, -cos])
        reflected = self.reflected_field(points)[..., None] * np.array([sin, cos])
        return 1j * self.k * (incident + reflected)


@dataclass(frozen=True)
class Density:
    """
    Nodal values of the combined-layer density.

    Attributes:
        values (numpy.ndarray): One complex value per mesh node.
        incident (IncidentWave, optional): The wave the density was solved for. Needed to
            interpolate the density off the nodes.
    """
    values: npt.NDArray[np.complex128]
    incident: Optional[IncidentWave] = None


@dataclass(frozen=True)
class ForwardSystem:
    """
    Factorized Nystrom matrix for one mesh, wavenumber and coupling parameter. Immutable once built,
    so concurrent solves with different right-hand sides are safe.

    Attributes:
        mesh (BoundaryMesh): The discretization.
        k (float): Wavenumber.
        eta (float): Coupling parameter.
        matrix (numpy.ndarray): The ``2n x 2n`` system matrix.
        rcond (float): LAPACK estimate of the reciprocal 1-norm condition number.
    """
    mesh: BoundaryMesh
    k: float
    eta: float
    matrix: npt.NDArray[np.complex128]
    rcond: float
    _factorization: tuple = field(repr=False, compare=False)

    @property
    def condition_number(self) -> float:
        return np.inf if self.rcond == 0 else 1 / self.rcond

    def solve(self, g: npt.ArrayLike) -> npt.NDArray[np.complex128]:
        """
        Solves with one right-hand side of shape ``(2n,)`` or several stacked as columns.
        """
        return linalg.lu_solve(self._factorization, np.asarray(g, dtype=np.complex128), check_finite=False)


def row_structure(tags: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    """
    Returns:
        The identity coefficient and the quadrature factor of every equation: ``(1, 2)`` on the perturbed
        segment, ``(1/2, 2)`` at the corners and ``(1/2, 1)`` on the arc.
    """
    tags = np.asarray(tags)
    coefficient = np.where(tags == SegmentTag.FLAT, 1.0, 0.5)
    factor = np.where(tags == SegmentTag.ARC, 1.0, 2.0)
    return coefficient, factor


def operator_rows(targets: CurveNodes,
                  mesh: BoundaryMesh,
                  k: float,
                  eta: float,
                  refinement: Optional[int] = None,
                  ) -> tuple[np.ndarray, np.ndarray]:
    """
    The discretized integral operator collocated at arbitrary curve parameters. The full equation at a
    target ``t`` reads ``coefficient(t) phi(t) + rows(t) @ phi = g(t)``.

    Args:
        targets: Collocation points.
        mesh: Quadrature nodes.
        k: Wavenumber.
        eta: Coupling parameter.
        refinement: If the targets are the nodes of ``mesh.refine(refinement)``, the quadrature weights
            are looked up on that lattice instead of being evaluated per offset.

    Returns:
        ``(coefficient, rows)`` of shapes ``(m,)`` and ``(m, 2n)``.
    """
    n = mesh.n
    coefficient, factor = row_structure(targets.tags)
    if refinement is not None:
        lattice_size = 2 * n * refinement
        lattice_weights = kress_weights(n, np.pi * (np.arange(lattice_size) / (n * refinement)))
        target_index = np.rint(targets.params * n * refinement / np.pi).astype(np.int64)
        source_index = np.arange(2 * n) * refinement

    rows = np.empty((len(targets), mesh.size), dtype=np.complex128)
    for start in range(0, len(targets), _ROW_CHUNK):
        chunk = slice(start, start + _ROW_CHUNK)
        chunk_nodes = CurveNodes(*(getattr(targets, name)[chunk] for name in
                                   ('params', 'points', 'derivatives', 'second_derivatives',
                                    'speeds', 'normals', 'tags')))
        k1, k2, k3 = kernel_blocks(chunk_nodes, mesh, k, eta)
        if refinement is not None:
            offsets = np.mod(target_index[chunk, None] - source_index[None, :], lattice_size)
            weights = lattice_weights[offsets]
        else:
            weights = kress_weights(n, chunk_nodes.params[:, None] - mesh.params[None, :])
        rows[chunk] = factor[chunk, None] * (weights * k1 + (np.pi / n) * k2) + (np.pi / n) * k3
    return coefficient, rows


def assemble(mesh: BoundaryMesh, k: float, eta: float, rcond_threshold: float = SINGULAR_RCOND) -> ForwardSystem:
    """
    Assembles and LU-factorizes the Nystrom system for ``(mesh, k, eta)``.

    Corner unknowns are kept; their columns vanish, so they only couple through the diagonal.

    Raises:
        ValueError: If ``k <= 0``.
        SingularSystemError: If a pivot vanishes or the condition estimate exceeds ``1 / rcond_threshold``.
    """
    if not k > 0:
        raise ValueError(f'Wavenumber must be positive, got {k}.')
    coefficient, rows = operator_rows(mesh.nodes, mesh, k, eta)
    matrix = rows + np.diag(coefficient)
    if not np.all(np.isfinite(matrix)):
        raise ValueError('Nystrom matrix contains non-finite values.')

    lu, piv = linalg.lu_factor(matrix, check_finite=False)
    if np.any(np.diag(lu) == 0):
        rcond = 0.0
    else:
        gecon, = linalg.get_lapack_funcs(('gecon',), (lu,))
        rcond, _ = gecon(lu, np.linalg.norm(matrix, 1), norm='1')
        rcond = float(rcond)
    _logger.debug(f'Assembled system: n={mesh.n}, k={k}, eta={eta}, rcond={rcond:.3e}')
    if rcond < rcond_threshold:
        msg = f'Nystrom system is numerically singular (k={k}, eta={eta}, rcond={rcond:.3e}).'
        _logger.error(msg)
        raise SingularSystemError(msg, k=k, eta=eta, rcond=rcond)
    return ForwardSystem(mesh=mesh, k=k, eta=eta, matrix=matrix, rcond=rcond, _factorization=(lu, piv))


def boundary_data(nodes: CurveNodes, incident: IncidentWave) -> npt.NDArray[np.complex128]:
    """``-2 (u^i + u^r)`` on the perturbed segment, zero on the arc and at the corners"""
    g = np.zeros(len(nodes), dtype=np.complex128)
    flat = nodes.tags == SegmentTag.FLAT
    g[flat] = -2 * incident.total_field(nodes.points[flat])
    return g


def rhs(mesh: BoundaryMesh, incident: IncidentWave) -> npt.NDArray[np.complex128]:
    """Right-hand side of the Nystrom system at the mesh nodes."""
    return boundary_data(mesh.nodes, incident)


def solve(system: ForwardSystem, g: npt.ArrayLike) -> Density:
    """Solves the factorized system for the nodal density."""
    return Density(values=system.solve(g))


def solve_scattering(system: ForwardSystem, incident: IncidentWave) -> Density:
    """
    Solves for the density scattering ``incident`` and records the wave in the result.

    Raises:
        ValueError: If the wave and the system have different wavenumbers.
    """
    if not np.isclose(incident.k, system.k, rtol=1e-14, atol=0):
        raise ValueError(f'Incident wavenumber {incident.k} does not match the system ({system.k}).')
    return Density(values=system.solve(rhs(system.mesh, incident)), incident=incident)


def nystrom_interpolate(mesh: BoundaryMesh,
                        density: Density,
                        k: float,
                        eta: float,
                        params: npt.ArrayLike,
                        refinement: Optional[int] = None,
                        ) -> npt.NDArray[np.complex128]:
    """
    Evaluates the density between the nodes through the Nystrom interpolation formula
    ``phi(t) = (g(t) - rows(t) @ phi) / coefficient(t)``, which reproduces the nodal values at the nodes.

    Args:
        mesh: The mesh the density was solved on.
        density: Solution carrying its incident wave.
        k: Wavenumber of the solve.
        eta: Coupling parameter of the solve.
        params: Curve parameters to interpolate at.
        refinement: Pass the factor when ``params`` are the nodes of ``mesh.refine(refinement)``.

    Raises:
        ValueError: If the density does not record its incident wave.
    """
    if density.incident is None:
        raise ValueError('Nystrom interpolation needs the incident wave the density was solved for.')
    targets = curve_nodes(mesh.profile, params)
    coefficient, rows = operator_rows(targets, mesh, k, eta, refinement=refinement)
    g = boundary_data(targets, density.incident)
    return (g - rows @ density.values) / coefficient
