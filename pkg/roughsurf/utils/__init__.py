"""
Miscellaneous classes that are used by multiple modules.

The idea behind ``roughsurf.utils`` is that other modules depend on it, but it itself does not depend on
any other module. That is different to :mod:`roughsurf.tools` which works the other way around.

Exported classes:

- :class:`SavableLoadable`
- :class:`Stopwatch`
- :class:`RoughSurfError`
- :class:`DomainError`
- :class:`CoincidentPointsError`
- :class:`SingularSystemError`
- :class:`ConfigValidationError`
- :class:`ArtifactIntegrityError`
"""
from .errors import (
    RoughSurfError,
    DomainError,
    CoincidentPointsError,
    SingularSystemError,
    ConfigValidationError,
    ArtifactIntegrityError,
)
from .saving_loading import SavableLoadable
from .stopwatch import Stopwatch


__all__ = [
    'SavableLoadable',
    'Stopwatch',
    'RoughSurfError',
    'DomainError',
    'CoincidentPointsError',
    'SingularSystemError',
    'ConfigValidationError',
    'ArtifactIntegrityError',
]
