from typing import Optional


class ExpHodgeError(ValueError):
    """
    Base error class
    """


class LaurentParseError(ExpHodgeError):
    def __init__(self, message: str, position: Optional[int] = None):
        self.position = position
        if position is not None:
            message = f"{message} at position {position}"
        super().__init__(message)


class ZeroPolynomialError(LaurentParseError):
    def __init__(self):
        super().__init__("f must be nonzero")


class UnknownVariableError(LaurentParseError):
    pass


class BadPrimeError(ExpHodgeError):
    def __init__(self, p: int):
        self.p = p
        super().__init__(f"bad prime {p}: a coefficient denominator vanishes mod {p}")


class PrimeExhaustionError(ExpHodgeError):
    pass


class FaceError(ExpHodgeError):
    pass


class DimensionDeficiencyError(ExpHodgeError):
    def __init__(self, dim: int, n: int):
        self.dim = dim
        self.n = n
        super().__init__(f"dim Δ(f) = {dim} < n = {n}; split off a subtorus (product reduction)")


class LevelError(ExpHodgeError):
    pass


class GroebnerBudgetExceeded(ExpHodgeError):
    def __init__(self, budget: int):
        self.budget = budget
        super().__init__(f"budget exceeded: more than {budget} critical pairs")


class CurveError(ExpHodgeError):
    pass


class IntegrityError(ExpHodgeError):
    pass


class TruncationUnstableError(IntegrityError):
    pass


class StabilizationError(IntegrityError):
    pass
