"""
Frechet derivative of the far-field map with respect to the surface profile.

Exported classes:

- :class:`NormalDerivativeTrace`
- :class:`Jacobian`
- :class:`IncrementBasis`

Exported functions:

- :func:`normal_derivative`
- :func:`flat_trace`
- :func:`derivative_rhs`
- :func:`derivative_rhs_block`
- :func:`jacobian`
"""
from .trace import (NormalDerivativeTrace, STENCIL_SUBDIVISION, flat_trace, normal_derivative, derivative_rhs,
                    derivative_rhs_block)
from .jacobian import IncrementBasis, Jacobian, jacobian

__all__ = [
    'NormalDerivativeTrace',
    'Jacobian',
    'IncrementBasis',
    'STENCIL_SUBDIVISION',
    'flat_trace',
    'normal_derivative',
    'derivative_rhs',
    'derivative_rhs_block',
    'jacobian',
]
