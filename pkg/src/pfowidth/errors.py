"""Exception hierarchy shared by all modules."""


class PfoError(Exception):
    """Base class for every error raised by this package."""


class FormulaSyntaxError(PfoError, ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class InvalidPath(PfoError, LookupError):
    pass


class RuleNotApplicable(PfoError):
    def __init__(self, rule, path, reason):
        super().__init__(f"{rule} not applicable at {list(path)}: {reason}")
        self.rule = rule
        self.path = tuple(path)
        self.reason = reason


class ReplayError(PfoError):
    def __init__(self, index, cause):
        super().__init__(f"trace step {index} failed: {cause}")
        self.index = index
        self.cause = cause


class PreconditionViolated(PfoError):
    pass


class PolarityMismatch(PfoError, ValueError):
    pass


class AssociationMismatch(PfoError, ValueError):
    pass


class InternalInvariantViolation(PfoError, AssertionError):
    """Signals a bug: a proven invariant failed at runtime."""


class StepBudgetExceeded(PfoError):
    pass


class TooLarge(PfoError):
    pass


class InvalidDecomposition(PfoError, ValueError):
    pass


class StructureError(PfoError, ValueError):
    pass


class UnknownRelation(PfoError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ArityMismatch(PfoError, ValueError):
    pass


class FreeVariablesPresent(PfoError, ValueError):
    pass


class BudgetExceeded(PfoError):
    pass


class InvalidRegion(PfoError, ValueError):
    pass
