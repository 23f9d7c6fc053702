"""Exception types shared across the package."""


class QtsvmError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(QtsvmError):
    """Caller-supplied data violates a precondition (shape, symmetry, range)."""


class NumericError(QtsvmError):
    """A numerical operation failed (non-finite arithmetic, factorization failure)."""


class DataFormatError(QtsvmError):
    """A data file could not be parsed (CSV, benchmark config)."""


class ModelFileError(QtsvmError):
    """Base class for model persistence failures."""


class MalformedModelFileError(ModelFileError):
    """The model file is truncated or not valid for parsing."""


class ModelVersionError(ModelFileError):
    """The model file declares an unsupported format version."""


class ModelInconsistencyError(ModelFileError):
    """The model file parsed, but its fields disagree on dimensions."""
