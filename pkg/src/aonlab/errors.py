"""Exception hierarchy.

Every error a caller can fix by changing inputs derives from
:class:`PreconditionError`; the CLI maps those to exit code 2.
"""


class PreconditionError(ValueError):
    """Inputs violate an operation's documented precondition."""


class BudgetExceeded(PreconditionError):
    """An exhaustive enumeration or sweep exceeds its configured budget."""


class LambdaTooSmall(PreconditionError):
    """Null scale too close to (or below) the validity boundary of the exact chi-square formula."""


class RejectionBudgetExhausted(RuntimeError):
    """Rejection sampling ran out of attempts before the event held."""

    def __init__(self, attempts: int):
        super().__init__(
            f"conditioning event not met after {attempts} draws; "
            "increase gamma, decrease tau or raise max_rejects"
        )
        self.attempts = attempts


class ZeroObservation(PreconditionError):
    """A statistic normalised by ||Y|| was asked to handle ||Y|| = 0."""
