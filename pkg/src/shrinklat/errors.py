"""Exception hierarchy shared by all shrinklat modules."""


class ShrinklatError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(ShrinklatError):
    pass


class SingularMatrix(ShrinklatError):
    pass


class OutOfDomain(ShrinklatError):
    pass


class NumericJetUnstable(ShrinklatError):
    pass


class RankDeficient(ShrinklatError):
    pass


class SingularJet(ShrinklatError):
    pass


class NotUnimodular(ShrinklatError):
    pass


class PrecisionExhausted(ShrinklatError):
    pass


class DegenerateInput(ShrinklatError):
    pass


class JetDepthInsufficient(ShrinklatError):
    pass


class BadDimensions(ShrinklatError):
    pass


class OnDegeneracyLocus(ShrinklatError):
    pass


class EnumerationBudgetExceeded(ShrinklatError):
    pass


class BudgetExceeded(ShrinklatError):
    pass


class ConfigInvalid(ShrinklatError):
    pass
