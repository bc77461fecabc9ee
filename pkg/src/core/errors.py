"""Exception hierarchy shared by the numerical modules.

Library code raises these; only the command line turns them into exit codes.
"""


class FracDiffError(Exception):
    """Base class for every error raised by the package"""


class DomainError(FracDiffError, ValueError):
    """An argument lies outside the domain of the operation"""


class SetupError(FracDiffError, ValueError):
    """A problem specification violates its size or decay invariants"""


class ConfigError(FracDiffError, ValueError):
    """Invalid run configuration, subcommand or verification suite"""


class EvaluationError(FracDiffError, ArithmeticError):
    """A numerical strategy failed to reach its tolerance"""

    def __init__(self, message, estimate=None, values=None):
        super().__init__(message)
        self.estimate = estimate
        self.values = values

    def __str__(self):
        text = super().__str__()
        if self.estimate is not None:
            text = f"{text} (error estimate {self.estimate:.3e})"
        return text


class IllConditionedStepError(EvaluationError):
    """Volterra time step whose diagonal system is numerically singular"""
