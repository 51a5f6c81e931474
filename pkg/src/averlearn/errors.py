"""Exception hierarchy shared by all modules."""


class AverLearnError(ValueError):
    """Base class for every error raised by this package."""


class InvalidMatrix(AverLearnError):
    pass


class NotSubstochastic(AverLearnError):
    pass


class NotProperSubstochastic(AverLearnError):
    pass


class DimensionTooLarge(AverLearnError):
    pass


class NumericalFailure(AverLearnError):
    pass


class Inconclusive(AverLearnError):
    """Raised when an iterative test exhausts its budget without a verdict."""


class NotAnScc(AverLearnError):
    pass


class InvalidScenario(AverLearnError):
    pass


class InvalidInput(AverLearnError):
    pass


class InfeasibleLearner(AverLearnError):
    pass


class Unsupported(AverLearnError):
    pass


class NotApplicable(AverLearnError):
    pass


class SingularEquilibrium(AverLearnError):
    pass


class ScenarioParseError(AverLearnError):
    """Scenario text is malformed: bad JSON, unknown keys or wrong value types."""
