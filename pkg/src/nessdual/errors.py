"""Exception hierarchy. Every error raised by the package derives from NessError."""


class NessError(ValueError):
    pass


class NonPositiveSize(NessError):
    pass


class NonPositiveTemperature(NessError):
    pass


class NonPositiveM(NessError):
    pass


class L3SizeMismatch(NessError):
    pass


class UnknownField(NessError):
    pass


class DimensionMismatch(NessError):
    pass


class WrongFamily(NessError):
    pass


class NegativeEnergyInput(NessError):
    pass


class AbsorbedState(NessError):
    pass


class EventBudgetExceeded(NessError):
    pass


class WalkerBudgetExceeded(NessError):
    pass


class SingularSystem(NessError):
    pass


class SiteOrderViolation(NessError):
    pass


class VariableMismatch(NessError):
    pass


class DomainGap(NessError):
    pass


class DegreeBudgetExceeded(NessError):
    pass


class SeriesTooShort(NessError):
    pass


class EqualTemperaturesForKappa(NessError):
    pass
