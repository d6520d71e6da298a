"""Exception hierarchy shared by all selrisk modules."""


class SelRiskError(Exception):
    """Base class for every error raised by this package."""


class NonPositiveProbability(SelRiskError, ValueError):
    pass


class ProbabilitiesDoNotSumToOne(SelRiskError, ValueError):
    pass


class DimensionMismatch(SelRiskError, ValueError):
    pass


class IndexOutOfRange(SelRiskError, IndexError):
    pass


class InvalidAlpha(SelRiskError, ValueError):
    pass


class InvalidDistortion(SelRiskError, ValueError):
    pass


class EmptyScenarioSet(SelRiskError, ValueError):
    pass


class NegativeDensity(SelRiskError, ValueError):
    pass


class InvalidDensity(SelRiskError, ValueError):
    pass


class EmptyGeneratorSet(SelRiskError, ValueError):
    pass


class NonPositiveScale(SelRiskError, ValueError):
    pass


class NotRepresentable(SelRiskError):
    """An intersection left the orthant/half-space primitive class."""


class UnsupportedDimension(SelRiskError, ValueError):
    pass


class GridMismatch(SelRiskError, ValueError):
    pass


class SelectionBudgetExceeded(SelRiskError):
    def __init__(self, required, cap):
        super().__init__(
            f"enumeration needs {required} selections, cap is {cap}"
        )
        self.required = required
        self.cap = cap


class NonConvexRisk(SelRiskError, ValueError):
    pass


class PreconditionViolated(SelRiskError, ValueError):
    """A closed-form evaluator was called outside its validity range."""


class SameSignTransfer(PreconditionViolated):
    pass


class OrientationViolated(PreconditionViolated):
    pass


class SchemaError(SelRiskError, ValueError):
    """Scenario file failed validation; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key
