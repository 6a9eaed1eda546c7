"""Exception hierarchy.

Every error carries the process exit code the command line front end maps it
to, so that library callers and the CLI agree on failure classes.
"""


class MaxProbError(Exception):
    exit_code = 1


# input validation -> exit 2
class ValidationError(MaxProbError, ValueError):
    exit_code = 2


class NotNormalized(ValidationError):
    pass


class NegativeEntry(ValidationError):
    pass


class ZeroEntryInGenerator(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class CountSumMismatch(ValidationError):
    pass


class NonPositiveArgument(ValidationError):
    pass


class NonPositiveCount(ValidationError):
    pass


class DirectionNotAddingToZero(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


# infeasible or empty problem -> exit 3
class InfeasibleError(MaxProbError):
    exit_code = 3


class NonIntegerTarget(InfeasibleError):
    pass


class InfeasibleTarget(InfeasibleError):
    pass


class InfeasibleConstraints(InfeasibleError):
    pass


class EmptyWorkingSet(InfeasibleError):
    pass


class AllScoresImpossible(InfeasibleError):
    pass


# numerical failure -> exit 4
class NoConvergence(MaxProbError):
    exit_code = 4

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class NonPositiveDenominator(NoConvergence):
    pass


class GoldenMismatch(MaxProbError):
    exit_code = 5


class IoFailure(MaxProbError, OSError):
    exit_code = 6
