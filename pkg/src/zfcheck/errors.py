"""Exception types shared across the package."""


class ZfcheckError(Exception):
    """Base class for every error raised by this package on purpose."""


class GridValidationError(ZfcheckError):
    """A spectral grid violates its structural requirements."""


class GridDomainError(ZfcheckError):
    """A momentum argument does not lie on the configured grid."""


class CapacityError(ZfcheckError):
    """An operation would push a state past the configured particle cap."""


class ReflectionTableError(ZfcheckError):
    """A tabulated reflection matrix has no entry for a requested momentum."""


class ConfigError(ZfcheckError):
    """A run configuration is malformed or inconsistent."""


class NotWhitelistedError(ConfigError):
    """A reflection family failed the whitelist gate and may not be used."""
