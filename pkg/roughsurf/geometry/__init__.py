"""
Surface profiles, the graded substitution and the parametrized discretization of the closed curve
formed by the perturbed segment and the lower half-circle of radius ``R``.

Exported constants:

- :data:`MIN_MESH_SIZE`

Exported classes:

- :class:`SurfaceProfile`
- :class:`ClosedFormProfile`
- :class:`SplineProfile`
- :class:`SegmentTag`
- :class:`CurveNodes`
- :class:`BoundaryMesh`

Exported functions:

- :func:`cardinal_bspline`
- :func:`grading_v`
- :func:`grading_omega`
- :func:`curve_nodes`
- :func:`build_mesh`
- :func:`reflect`
"""
from .profiles import SurfaceProfile, ClosedFormProfile, SplineProfile, cardinal_bspline
from .grading import grading_v, grading_omega
from .mesh import MIN_MESH_SIZE, SegmentTag, CurveNodes, BoundaryMesh, curve_nodes, build_mesh, reflect

__all__ = [
    'MIN_MESH_SIZE',
    'SurfaceProfile',
    'ClosedFormProfile',
    'SplineProfile',
    'SegmentTag',
    'CurveNodes',
    'BoundaryMesh',
    'cardinal_bspline',
    'grading_v',
    'grading_omega',
    'curve_nodes',
    'build_mesh',
    'reflect',
]
