"""Exception types shared across the package."""


class AcdcError(Exception):
    """Base class for all package-specific errors."""


class DataError(AcdcError):
    """Malformed input data: CSV structure, labels, or dataset invariants."""


class SingleClassError(DataError):
    """Training or evaluation data contains only one label class."""


class DegenerateSplitError(AcdcError):
    """Every candidate split leaves one side empty; nothing can be scored."""


class CarvingRangeError(AcdcError, ValueError):
    """The dominant class ratio is outside the solvable range (0.5, 1)."""


class ModelFormatError(AcdcError):
    """Serialized model payload is malformed or carries an unknown version."""


class FeatureMismatchError(ModelFormatError):
    """A model references a feature the data does not provide compatibly."""
