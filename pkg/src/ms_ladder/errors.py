"""Exception hierarchy for ms_ladder."""


class MsLadderError(Exception):
    """Base class for every error raised by this package."""


# core linear algebra

class NotHermitian(MsLadderError, ValueError):
    pass


class NotCommuting(MsLadderError, ValueError):
    pass


class DimensionMismatch(MsLadderError, ValueError):
    pass


class NotPsd(MsLadderError, ValueError):
    pass


class RankTooLarge(MsLadderError, ValueError):
    pass


class NotUnitary(MsLadderError, ValueError):
    pass


# ladder model / input

class InvalidSystem(MsLadderError, ValueError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ParseError(MsLadderError, ValueError):
    def __init__(self, message, line=None, column=None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class SchemaError(MsLadderError, ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


# decomposition

class NotDecomposable(MsLadderError):
    """No Morris-Shore factorization exists for the given couplings.

    Attributes
    ----------
    level : int
        Index of the level at which the failure was detected.
    residual : float
        Scaled commutator residual (or basis-mismatch measure) at that level.
    """

    def __init__(self, level, residual, reason="interaction products do not commute"):
        super().__init__(f"level {level}: {reason} (residual {residual:.3e})")
        self.level = level
        self.residual = residual
        self.reason = reason


class PreconditionFailed(MsLadderError, ValueError):
    def __init__(self, condition, message):
        super().__init__(f"{condition}: {message}")
        self.condition = condition


# angular momentum

class InvalidQuantumNumbers(MsLadderError, ValueError):
    pass


class InvalidTransition(MsLadderError, ValueError):
    pass


class DomainError(MsLadderError, ValueError):
    pass


# dynamics

class StepFailure(MsLadderError, RuntimeError):
    pass


class GridMismatch(MsLadderError, ValueError):
    pass


# cli

class UnknownExample(MsLadderError, KeyError):
    def __init__(self, name, available):
        super().__init__(f"unknown example {name!r}; available: {', '.join(available)}")
        self.name = name
        self.available = list(available)

    def __str__(self):
        return self.args[0]
