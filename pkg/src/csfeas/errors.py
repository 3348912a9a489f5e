"""Exception hierarchy shared by the solvers and the command line harness.

Each class carries the process exit code the CLI reports when it escapes.
"""


class CSFeasError(Exception):
    exit_code = 1


class UsageError(CSFeasError, ValueError):
    """Invalid arguments, configuration or preconditions."""

    exit_code = 2


class ProblemFormatError(CSFeasError, ValueError):
    """A problem file or config file could not be parsed."""

    exit_code = 3

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateConstraintError(CSFeasError, ArithmeticError):
    """A constraint has a zero (sub)gradient where a step is required."""

    exit_code = 4

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)


class DivergenceError(CSFeasError, ArithmeticError):
    """An iterate became non-finite."""

    exit_code = 4

    def __init__(self, message, sweep=None):
        self.sweep = sweep
        super().__init__(message)


class UndefinedMetricError(CSFeasError, ArithmeticError):
    exit_code = 4
