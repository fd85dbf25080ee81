"""Exception types shared across the package."""


class RecscoreError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(RecscoreError):
    pass


class NonFiniteValue(RecscoreError):
    def __init__(self, array, row, col=None):
        self.array = array
        self.row = row
        self.col = col
        where = f"{array}[{row}]" if col is None else f"{array}[{row}, {col}]"
        super().__init__(f"non-finite value at {where}")


class ZeroVarianceColumn(RecscoreError):
    def __init__(self, col):
        self.col = col
        super().__init__(f"column {col} has zero sample variance")


class InvalidSplit(RecscoreError):
    pass


class BoundaryActive(RecscoreError):
    """The l2-ball constraint is active, so the stationarity certificate is invalid."""


class NonFiniteObjective(RecscoreError):
    """The penalized objective became NaN/Inf during descent (bad step size)."""


class SingularHessian(RecscoreError):
    """The restricted Hessian is numerically singular; the support is too large or degenerate."""


class DegenerateVariance(RecscoreError):
    """The decorrelated score variance estimate is ~0: the target covariate is explained by the support."""


class ZeroNewtonDenominator(RecscoreError):
    """All curvature vanished in the score derivative (redescending loss saturated)."""


class SolverFailure(RecscoreError):
    pass


class AllRepsFailed(RecscoreError):
    pass


class ConfigError(RecscoreError):
    """Invalid or unknown configuration key/value."""


class DataError(RecscoreError):
    """Malformed input data file."""


class DomainError(RecscoreError):
    pass
