from typing import Optional


class RoughSurfError(Exception):
    """Base class of every error raised on purpose by ``roughsurf``."""


class DomainError(RoughSurfError, ValueError):
    """An argument lies outside the domain of a mathematical function."""


class CoincidentPointsError(RoughSurfError, ValueError):
    """A kernel or a potential was requested at a point lying on its source."""


class SingularSystemError(RoughSurfError, ArithmeticError):
    """
    A Nystrom matrix could not be factorized reliably.

    For ``eta = 0`` this usually means that ``k`` is close to an interior
    Dirichlet eigenvalue of the truncated domain.

    Attributes:
        k (float): Wavenumber of the failed system.
        eta (float): Coupling parameter of the failed system.
        rcond (float): Estimated reciprocal condition number (0 for an exactly zero pivot).
    """

    def __init__(self, message: str, k: float, eta: float, rcond: float) -> None:
        super().__init__(message)
        self.k = k
        self.eta = eta
        self.rcond = rcond


class ConfigValidationError(RoughSurfError, ValueError):
    """
    An experiment configuration is invalid.

    Attributes:
        message (str): The problem, without its location.
        field (str): Dotted path of the offending field (empty for whole-file problems).
        line (int, optional): 1-based line in the configuration file, if it could be located.
    """

    def __init__(self, message: str, field: str = '', line: Optional[int] = None) -> None:
        location = ''
        if field:
            location += f'field "{field}"'
        if line is not None:
            location += f' (line {line})'
        super().__init__(f'{location.strip()}: {message}' if location else message)
        self.message = message
        self.field = field
        self.line = line


class ArtifactIntegrityError(RoughSurfError):
    """A result file does not match the provenance hashes it carries."""
