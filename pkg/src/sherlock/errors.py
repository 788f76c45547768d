"""Exception types shared across the package."""


class SherlockError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SherlockError):
    """Invalid hyperparameter, rate, target vector or other configuration."""


class ShapeError(SherlockError):
    """Array shapes or index ranges disagree with what an operation expects."""


class NumericError(SherlockError):
    """Non-finite values where finite ones are required (e.g. gradients)."""


class DataError(SherlockError):
    """Corpus-level problems: malformed records in strict mode, empty input."""


class UndefinedAUCError(SherlockError):
    """ROC-AUC asked for on a single-class label sequence."""


class CheckpointError(SherlockError):
    """Base class for model-container problems."""


class NotAModelFileError(CheckpointError):
    """File does not start with the model container magic bytes."""


class VersionMismatchError(CheckpointError):
    """Container format version is not one this build can read."""


class TruncatedFileError(CheckpointError):
    """Container ends before all declared blocks and tensors are present."""


class ChecksumError(CheckpointError):
    """Container is structurally complete but its checksum does not match."""
