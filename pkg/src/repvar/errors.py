"""Exception hierarchy and the exit codes the CLI maps each class to."""


class RepvarError(Exception):
    """Base class for all library errors. ``exit_code`` is the CLI's exit status."""

    exit_code = 1


class ParseError(RepvarError):
    """Malformed input file. Carries the 1-based line number when known."""

    exit_code = 10

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MissingPair(ParseError):
    exit_code = 11


class DuplicatePsu(ParseError):
    exit_code = 12


class NonPositiveWeight(ParseError):
    exit_code = 13


class UnconstructibleOrder(RepvarError):
    exit_code = 20


class InsufficientBalancedColumns(RepvarError):
    exit_code = 21


class EpsilonOutOfRange(RepvarError):
    exit_code = 22


class TooFewZones(RepvarError):
    exit_code = 23


class OddReplicateCount(RepvarError):
    exit_code = 24


class DimensionMismatch(RepvarError):
    exit_code = 25


class DegenerateContrasts(RepvarError):
    exit_code = 30


class InvalidProbability(RepvarError):
    exit_code = 31


class ConfigError(RepvarError):
    exit_code = 40
