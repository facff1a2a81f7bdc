"""Exception hierarchy shared by the library and the command-line front end."""


class StencilCertError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(StencilCertError):
    """Malformed problem configuration or unreadable input files."""

    exit_code = 1


class SmoothnessError(StencilCertError, ValueError):
    """A requested derivative exceeds the smoothness of the kernel."""

    exit_code = 1


class InconsistentMomentsError(StencilCertError):
    """The polynomial moment equations have no solution."""

    exit_code = 2


class SingularSystemError(StencilCertError):
    """The saddle-point system is numerically singular."""

    exit_code = 3


class ExactnessError(StencilCertError, ValueError):
    """A weight vector is not exact on the required polynomial space."""

    exit_code = 1
