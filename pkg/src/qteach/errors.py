"""Exception types shared across the package."""


class QTeachError(Exception):
    """Base class for all qteach errors."""


class ConfigurationError(QTeachError, ValueError):
    """A caller-supplied value is outside the supported range."""


class StructuralError(QTeachError, ValueError):
    """An object is internally inconsistent (bad indices, shape mismatch)."""


class UnsupportedArchitectureError(QTeachError, ValueError):
    """The requested operation cannot be applied to this circuit."""


class TrainingDivergedError(QTeachError, RuntimeError):
    """The loss became non-finite during optimization."""


class ConfigParseError(QTeachError, ValueError):
    """An experiment config file could not be parsed."""
