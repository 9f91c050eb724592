"""Exception hierarchy shared by every module."""


class SuperintError(Exception):
    """Base class for all library errors."""


class DomainError(SuperintError, ValueError):
    """Input lies outside the operation's mathematical domain."""


class SingularityError(DomainError):
    """State or angle sits on (or too near) a singular ray of the potential."""


class StencilError(SuperintError, ValueError):
    """Finite-difference stencil would straddle a singularity."""


class IntegrationError(SuperintError, RuntimeError):
    """Trajectory became non-finite."""


class ConfigError(SuperintError, ValueError):
    """Invalid experiment configuration.

    ``line`` is the 1-based line of the offending key when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
