"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or inconsistent input (maps to CLI exit code 3)."""


class VarlistMismatch(InputError):
    pass


class BudgetExceeded(RuntimeError):
    """A bounded search ran out of its step budget."""


class NotTangentError(InputError):
    """A field was required to be tangent to its variety but is not."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or []


class SeparationError(InputError):
    """Points collide under one of the supplied first integrals."""

    def __init__(self, message, stage=None, pair=None):
        super().__init__(message)
        self.stage = stage
        self.pair = pair
