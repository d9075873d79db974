"""Exception hierarchy shared by all fuzzyspec modules."""


class FuzzyspecError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(FuzzyspecError, ValueError):
    pass


class ConfigurationError(FuzzyspecError, ValueError):
    pass


class ParameterError(FuzzyspecError, ValueError):
    pass


class ContractError(FuzzyspecError):
    pass


class SymmetryError(FuzzyspecError):
    """Raised when an operator fails a (weighted) Hermiticity/symmetry check."""

    def __init__(self, message, defect):
        super().__init__(f"{message} (defect={defect:.3e})")
        self.defect = float(defect)


class NumericalRankError(FuzzyspecError):
    pass


class EigenvalueOneError(FuzzyspecError):
    """The unitary has eigenvalue 1, so its inverse Cayley transform is unbounded."""

    def __init__(self, message, flat_direction):
        super().__init__(message)
        self.flat_direction = flat_direction


class InfeasibleError(FuzzyspecError):
    """Requested expectation value lies outside what the domain can reach."""

    def __init__(self, message, achievable):
        lo, hi = achievable
        super().__init__(f"{message}; achievable mean interval [{lo:.6g}, {hi:.6g}]")
        self.achievable = (float(lo), float(hi))
