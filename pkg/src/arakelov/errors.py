"""Exception hierarchy shared by all modules."""


class ArakelovError(Exception):
    """Base class. ``user_error`` distinguishes bad input from broken invariants."""

    user_error = True


class DimensionMismatch(ArakelovError):
    pass


class Inconsistent(ArakelovError):
    """Right-hand side is not in the column space of the system."""


class AmbiguousKernel(ArakelovError):
    """Kernel has dimension > 1 after pinning (disconnected fiber)."""


class UnboundSymbol(ArakelovError):
    def __init__(self, name):
        super().__init__(f"unbound symbol {name!r}")
        self.name = name


class InvalidFiber(ArakelovError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid fiber")


class SingleComponent(ArakelovError):
    pass


class AdjunctionMismatch(ArakelovError):
    pass


class WidthMismatch(ArakelovError):
    pass


class DegenerateStats(ArakelovError):
    pass


class ManinDrinfeldNotAsserted(ArakelovError):
    pass


class NonPositiveLambda(ArakelovError):
    pass


class InvalidN(ArakelovError):
    pass


class InvalidPrime(ArakelovError):
    pass


class NonIntegralCrossing(ArakelovError):
    user_error = False


class InvalidSurface(ArakelovError):
    pass


class InvalidMeasure(ArakelovError):
    pass


class EigenFailure(ArakelovError):
    user_error = False
