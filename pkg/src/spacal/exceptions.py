"""Exception types shared across the package."""


class SpacalError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SpacalError):
    """Invalid or inconsistent scenario configuration."""


class NumericalError(SpacalError):
    """Base class for numerical failures (CLI exit code 2)."""


class UnidentifiableError(NumericalError):
    """The data/design cannot identify the requested parameters.

    Raised e.g. when every coarse-search grid cell carries no design
    energy, or when the Fisher information matrix is singular.
    """


class SingularDesignError(NumericalError):
    """A beam-design information matrix is singular or ill-conditioned."""


class CalibrationError(NumericalError):
    """Channel or phase estimation failed inside the calibration loop."""
