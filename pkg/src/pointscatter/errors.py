"""Exception hierarchy.

Every error raised deliberately by the package derives from
:class:`PointScatterError`; the ``exit_code`` attribute is what the command
line front-end returns for that category.
"""


class PointScatterError(Exception):
    exit_code = 1


class DomainError(PointScatterError, ValueError):
    """An argument lies outside the domain of the operation."""

    exit_code = 2


class DimensionError(DomainError):
    """Operation is not defined in the requested spatial dimension."""

    exit_code = 3


class EmptyLevelSetError(DomainError):
    exit_code = 4


class CapacityError(PointScatterError):
    """Problem size exceeds a hard guard (mode count, oracle size)."""

    exit_code = 5


class PoleProximityError(DomainError):
    """Evaluation point coincides with an unperturbed level to working precision."""

    exit_code = 6


class TruncationError(DomainError):
    """Query energy too close to the level-set cutoff for the tail correction."""

    exit_code = 7


class NumericalResolutionError(PointScatterError, ArithmeticError):
    exit_code = 8


class SampleSizeError(DomainError):
    exit_code = 9


class ConfigError(PointScatterError, ValueError):
    """Invalid scenario configuration; ``key`` names the offending field."""

    exit_code = 10

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
