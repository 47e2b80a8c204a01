"""Exception types shared across the package."""


class InvalidArgument(ValueError):
    """Bad caller input: wrong shape, out-of-range value, mismatched grids."""


class InvalidDistribution(InvalidArgument):
    """Emitter distribution that cannot be normalized (e.g. all-zero table)."""


class NumericFailure(RuntimeError):
    """Quadrature or integration did not reach the requested accuracy."""

    def __init__(self, message, error_estimate=None):
        if error_estimate is not None:
            message = f"{message} (error estimate {error_estimate:.3e})"
        super().__init__(message)
        self.error_estimate = error_estimate


class ConfigError(ValueError):
    """Malformed or inconsistent configuration file."""

    def __init__(self, message, line=None, path=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.path = path


class ResolutionWarning(UserWarning):
    """Grid too coarse for the narrowest feature of a kernel."""
