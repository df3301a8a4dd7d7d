"""Exception hierarchy shared by every module."""


class OxqnnError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(OxqnnError, ValueError):
    pass


class ResourceLimitError(OxqnnError):
    """Raised when a request would need a register larger than supported."""


class DegenerateFeatureError(OxqnnError, ValueError):
    pass


class NumericalError(OxqnnError, ArithmeticError):
    """A non-finite value showed up where a finite one is required."""


class DataError(OxqnnError, ValueError):
    """Malformed dataset or config file."""


class ConfigError(OxqnnError, ValueError):
    """Unknown or inconsistent run configuration."""
