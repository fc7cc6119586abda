"""
Exception types shared across the toolkit.
The command-line entry point maps each one to a stable exit code.
"""


class RadarHeadError(Exception):
    """Base class for toolkit errors."""

    exit_code = 3


class InvalidArgumentError(RadarHeadError, ValueError):
    """An operation received an argument outside its documented domain."""

    exit_code = 1


class InvalidInputError(RadarHeadError):
    """A config document, dataset or checkpoint could not be accepted."""

    exit_code = 1


class TrainingError(RadarHeadError, RuntimeError):
    """Training or evaluation failed at runtime (e.g. a non-finite loss)."""

    exit_code = 3
