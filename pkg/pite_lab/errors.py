"""Exception hierarchy shared by the numerical core and the CLI.

Each class carries the process exit code the CLI reports for it.
"""


class PiteLabError(Exception):
    exit_code = 1


class InvalidArgumentError(PiteLabError, ValueError):
    exit_code = 2


class ResourceLimitError(PiteLabError):
    exit_code = 2


class ConfigError(PiteLabError):
    exit_code = 2


class NumericError(PiteLabError):
    exit_code = 3


class EigensolverError(NumericError):
    pass


class SingularityError(NumericError):
    """γ too close to 1/√2, where θ and s are not expandable."""


class DegenerateTargetError(NumericError):
    pass


class DampingUnderflowError(NumericError):
    pass


class EmbeddingError(NumericError):
    pass


class PostselectionError(NumericError):
    pass


class InternalError(PiteLabError):
    exit_code = 3


class OutputError(PiteLabError, OSError):
    exit_code = 4
