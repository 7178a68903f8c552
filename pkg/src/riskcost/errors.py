"""Exception hierarchy shared by all riskcost modules."""


class RiskCostError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(RiskCostError, ValueError):
    """Invalid parameters or configuration values."""


class DomainError(RiskCostError, ValueError):
    """Input outside the domain where a formula is defined."""


class UsageError(RiskCostError, ValueError):
    """Inconsistent call, e.g. mismatched array dimensions."""


class SingularityError(RiskCostError, ArithmeticError):
    """Wishart matrix (or a derived moment) is singular or indefinite."""


class DivergenceError(RiskCostError, ArithmeticError):
    """Iteration produced non-finite values."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NonConvergenceError(RiskCostError, RuntimeError):
    """Iteration cap reached before the stopping criterion was met."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class TrialError(RiskCostError, RuntimeError):
    """A solver error tagged with the (trial, eta) cell that produced it."""

    def __init__(self, trial, eta, cause):
        super().__init__(f"trial {trial}, eta={eta:g}: {cause}")
        self.trial = trial
        self.eta = eta
        self.cause = cause


class SweepError(RiskCostError, RuntimeError):
    """Too many cells of a sweep failed for the run to be usable."""
