"""
Real-argument Bessel and Hankel functions of orders 0 and 1 used by the Helmholtz kernels.

Values come from ``scipy.special`` (Cephes); this module only adds domain checks and a
scalar-or-array calling convention.

Exported functions:

- :func:`bessel_j`
- :func:`bessel_y`
- :func:`hankel1`
"""
from .bessel import bessel_j, bessel_y, hankel1

__all__ = [
    'bessel_j',
    'bessel_y',
    'hankel1',
]
