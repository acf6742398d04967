"""Exception hierarchy shared by all entlab modules."""


class EntlabError(ValueError):
    """Base class for invalid inputs to entlab routines."""


class NotHermitian(EntlabError):
    pass


class NotPSD(EntlabError):
    pass


class NoConvergence(ArithmeticError):
    pass


class DimensionMismatch(EntlabError):
    pass


class DimensionUnsupported(EntlabError):
    pass


class NotUnitary(EntlabError):
    pass


class NotNormalized(EntlabError):
    pass


class NotAState(EntlabError):
    """Raised when a matrix fails density-matrix validation.

    The failing diagnostics record is kept on ``diagnostics``.
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class NotTracePreserving(EntlabError):
    def __init__(self, message, defect):
        super().__init__(message)
        self.defect = defect


class ParamOutOfRange(EntlabError):
    pass


class InvariantViolation(AssertionError):
    """A numerical check that must hold for a correct implementation failed."""
