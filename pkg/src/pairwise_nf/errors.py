"""Exception hierarchy shared by every stage."""


class PairwiseError(Exception):
    """Base class for all errors raised by this package."""

    code = "Error"


class UndeclaredSymbol(PairwiseError):
    code = "UndeclaredSymbol"


class DomainEscape(PairwiseError):
    code = "DomainEscape"


class ConflictingWrites(PairwiseError):
    code = "ConflictingWrites"


class UndefinedStep(PairwiseError):
    code = "UndefinedStep"


class UnknownState(PairwiseError):
    code = "UnknownState"


class EmptyRange(PairwiseError):
    code = "EmptyRange"


class ApMismatch(PairwiseError):
    code = "ApMismatch"


class CompileError(PairwiseError):
    code = "CompileError"


class BudgetExceeded(PairwiseError):
    """Raised when an exploration or expansion exceeds its configured cap."""

    code = "BudgetExceeded"

    def __init__(self, message, measured=None, budget=None):
        super().__init__(message)
        self.measured = measured
        self.budget = budget


class StateSpaceBudgetExceeded(BudgetExceeded):
    code = "StateSpaceBudgetExceeded"


class ArcBudgetExceeded(BudgetExceeded):
    code = "ArcBudgetExceeded"


class DiagnosticError(PairwiseError):
    """A source unit failed to parse or validate; carries the diagnostics."""

    code = "Diagnostics"

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))
