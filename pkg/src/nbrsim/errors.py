"""Exception types shared across the package."""


class NbrsimError(Exception):
    """Base class for all package-specific errors."""


class GraphFormatError(NbrsimError):
    """Malformed or inconsistent input file (edge list, label list, patterns)."""


class BudgetExceededError(NbrsimError):
    """A bounded search ran out of its state budget instead of answering wrong."""


class PartialMiningError(BudgetExceededError):
    """Mining hit a budget; carries the frequent patterns confirmed so far."""

    def __init__(self, message, partial):
        super().__init__(message)
        self.partial = partial


class OracleLimitError(NbrsimError):
    """A test-support oracle refused an input larger than its size limit."""


class MissingArtifactError(NbrsimError):
    """A measure was invoked without the precomputed artifact it needs."""


class ParamsMismatchError(NbrsimError):
    """Two feature vectors built under different parameters were combined."""
