"""
Nystrom discretization of the combined-layer integral equation on the graded closed curve, its
factorized solution and the evaluation of the scattered and far fields.

Exported classes:

- :class:`IncidentWave`
- :class:`ForwardSystem`
- :class:`Density`
- :class:`FarFieldPattern`

Exported functions:

- :func:`kress_weights`
- :func:`quad_weights_R`
- :func:`kernel_K`, :func:`kernel_K1`, :func:`kernel_K2`, :func:`kernel_K3`
- :func:`single_layer_blocks`, :func:`adjoint_blocks`, :func:`hypersingular_kernel`
- :func:`operator_rows`
- :func:`assemble`
- :func:`rhs`
- :func:`solve`
- :func:`solve_scattering`
- :func:`nystrom_interpolate`
- :func:`far_field_matrix`
- :func:`far_field`
- :func:`potential_eval`
"""
from .quadrature import kress_weights, quad_weights_R
from .kernels import (kernel_blocks, kernel_K, kernel_K1, kernel_K2, kernel_K3, combined_kernel, single_layer_blocks,
                      adjoint_blocks, hypersingular_kernel)
from .system import (IncidentWave, ForwardSystem, Density, SINGULAR_RCOND, row_structure, operator_rows,
                     assemble, boundary_data, rhs, solve, solve_scattering, nystrom_interpolate)
from .fields import (FarFieldPattern, POTENTIAL_REFINEMENT, observation_angles, far_field_matrix, far_field,
                     refined_density, potential_eval)

__all__ = [
    'IncidentWave',
    'ForwardSystem',
    'Density',
    'FarFieldPattern',
    'SINGULAR_RCOND',
    'POTENTIAL_REFINEMENT',
    'kress_weights',
    'quad_weights_R',
    'kernel_blocks',
    'kernel_K',
    'kernel_K1',
    'kernel_K2',
    'kernel_K3',
    'combined_kernel',
    'single_layer_blocks',
    'adjoint_blocks',
    'hypersingular_kernel',
    'row_structure',
    'operator_rows',
    'assemble',
    'boundary_data',
    'rhs',
    'solve',
    'solve_scattering',
    'nystrom_interpolate',
    'observation_angles',
    'far_field_matrix',
    'far_field',
    'refined_density',
    'potential_eval',
]
