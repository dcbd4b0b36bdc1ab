"""Exceptions raised across the flowaug library.

Each exception derives from the builtin type a caller would naturally catch
(ValueError for bad inputs, ArithmeticError for numerical trouble), so code
that only cares about the broad category does not need to import this module.
"""


class InvalidArgumentError(ValueError):
    """An argument is outside the domain of the operation."""


class ParseError(ValueError):
    """A text input could not be parsed.

    Attributes:
        row: Int or None. 1-based data row at which parsing failed.
    """

    def __init__(self, message, row=None):
        if row is not None:
            message = 'row {}: {}'.format(row, message)
        super(ParseError, self).__init__(message)
        self.row = row


class FormatError(ValueError):
    """An on-disk artifact does not match its declared format."""


class ConfigError(ValueError):
    """A configuration failed validation."""


class JoinError(KeyError):
    """Rows of one table have no counterpart in another.

    Attributes:
        missing: Sorted list of the keys that could not be joined.
    """

    def __init__(self, missing):
        self.missing = sorted(missing)
        super(JoinError, self).__init__(
            'indices missing from annotations: {}'.format(self.missing))

    def __str__(self):
        return self.args[0]


class UndefinedVarianceError(ValueError):
    """Weighted variance requested with total weight not exceeding one."""


class UndefinedCorrelationError(ValueError):
    """Correlation requested for degenerate inputs."""


class NumericFailureError(ArithmeticError):
    """Non-finite values appeared inside a model.

    Attributes:
        block_index: Int or None. Index of the flow block that produced them.
    """

    def __init__(self, message, block_index=None):
        if block_index is not None:
            message = 'block {}: {}'.format(block_index, message)
        super(NumericFailureError, self).__init__(message)
        self.block_index = block_index


class DivergenceError(ArithmeticError):
    """Training produced a non-finite objective.

    Attributes:
        epoch: Int. Epoch (1-based) at which the objective diverged.
    """

    def __init__(self, epoch, value):
        super(DivergenceError, self).__init__(
            'training diverged at epoch {} (objective {})'.format(epoch, value))
        self.epoch = epoch


class SamplerError(RuntimeError):
    """A rejection sampler cannot make progress."""


class StageFailure(RuntimeError):
    """A pipeline stage failed.

    Attributes:
        stage: String name of the failed stage.
    """

    def __init__(self, stage, cause):
        super(StageFailure, self).__init__(
            'stage {} failed: {}: {}'.format(
                stage, type(cause).__name__, cause))
        self.stage = stage
        self.cause = cause


# Errors in the inputs, detected before any work is done or, for a report, when
# the data is too small to measure. The command line maps these to exit code 1
# and everything else to exit code 2.
VALIDATION_ERRORS = (InvalidArgumentError, ParseError, FormatError, ConfigError,
                     JoinError, UndefinedVarianceError)
