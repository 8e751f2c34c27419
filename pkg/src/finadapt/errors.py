"""Exception hierarchy for the finadapt package."""


class FinAdaptError(Exception):
    """Base class for all errors raised by finadapt."""


class MalformedProgram(FinAdaptError):
    pass


class IterationLimit(FinAdaptError):
    pass


class NodeLimit(FinAdaptError):
    pass


class TooLarge(FinAdaptError):
    pass


class DegenerateInput(FinAdaptError):
    pass


class OutOfRange(FinAdaptError):
    pass


class DimensionMismatch(FinAdaptError):
    pass


class RequiresDeterministicAB(FinAdaptError):
    """The solver needs A(.) and B(.) independent of the uncertainty."""


class NotOneDimensional(FinAdaptError):
    pass


class NotTwoDimensional(FinAdaptError):
    pass


class ScenarioOutsideOmega(FinAdaptError):
    pass


class CombinatorialBudgetExceeded(FinAdaptError):
    pass


class UnknownInstance(FinAdaptError, KeyError):
    pass


class InstanceFormatError(FinAdaptError, ValueError):
    """An instance or solution file does not match the expected schema."""


class BigMTooSmall(FinAdaptError):
    """Raised when doubling the big-M constant never yields a certified solution."""


class BigMTooSmallWarning(UserWarning):
    """Emitted when a big-M model had to be re-solved with a larger constant."""
