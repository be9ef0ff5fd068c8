"""Exception hierarchy shared by the solver, filter and optimizer modules."""


class TopOptError(Exception):
    """Base class for all errors raised by :mod:`topopt`."""


class ParameterError(TopOptError, ValueError):
    """An argument is out of range or has the wrong shape."""


class StructuralError(TopOptError):
    """The discretized system is singular (e.g. rigid-body modes left free)."""


class NumericalError(TopOptError):
    """An iterative procedure failed to converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConstraintError(TopOptError):
    """A volume target cannot be met within the density bounds."""


class StateError(TopOptError):
    """The design is in a state the requested operation does not accept."""


class ConfigError(TopOptError, ValueError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message, key=None, line=None):
        loc = []
        if key is not None:
            loc.append(f"key {key!r}")
        if line is not None:
            loc.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.key = key
        self.line = line


class RunAborted(TopOptError):
    """An optimization loop stopped on an error; ``record`` holds the iterations done so far."""

    def __init__(self, message, record, cause=None):
        super().__init__(message)
        self.record = record
        self.cause = cause
