"""Exception taxonomy shared across the package.

The CLI maps each class onto a stable exit code, so library code should
raise the most specific type that applies.
"""


class NcnError(Exception):
    """Base class for all package errors."""


class ConfigError(NcnError):
    """Invalid configuration value, key, topology, or dataset selector."""


class ShapeError(NcnError):
    """Dimension mismatch between arrays, layers, models, or datasets."""


class DatasetFormatError(NcnError):
    """Unparseable dataset file. ``line`` is the 1-based offending line."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DivergedError(NcnError):
    """Training produced a non-finite loss. ``epoch`` is 1-based."""

    def __init__(self, message, epoch):
        super().__init__(f"epoch {epoch}: {message}")
        self.epoch = epoch


class CheckpointError(NcnError):
    """Base class for checkpoint file problems."""


class CheckpointFormatError(CheckpointError):
    """Malformed or truncated checkpoint file."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint written by an unsupported format version."""


class CheckpointShapeError(CheckpointError):
    """Checkpoint content inconsistent with its own topology header."""


class AuditError(NcnError):
    """Live operation tally disagrees with the predicted budget."""
