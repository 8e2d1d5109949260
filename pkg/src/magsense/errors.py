"""Exception hierarchy shared by all modules."""


class MagsenseError(Exception):
    pass


class DomainError(MagsenseError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PreconditionError(MagsenseError, ValueError):
    """Inputs are individually valid but violate an operation precondition."""


class InstabilityError(MagsenseError):
    """The linearised dynamics are unstable, so no steady state exists."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class StiffnessError(MagsenseError):
    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class InternalConsistencyError(MagsenseError):
    """Two independent routes to the same quantity disagree."""


class ConfigError(MagsenseError):
    pass
