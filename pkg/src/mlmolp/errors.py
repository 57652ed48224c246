class MLMOLPError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(MLMOLPError, ValueError):
    pass


class DomainError(MLMOLPError, ValueError):
    """An argument lies outside the domain of a map or classification."""


class SingularBasisError(MLMOLPError):
    pass


class InfeasibleError(MLMOLPError):
    pass


class UnboundedError(MLMOLPError):
    pass


class ReducedModelInfeasible(InfeasibleError):
    """The level-p model built from the reduced bounds has no feasible point."""

    def __init__(self, level, lower, upper, reason=""):
        self.level = level
        self.lower = lower
        self.upper = upper
        msg = f"level {level}: reduced model is infeasible"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class ScenarioError(MLMOLPError, ValueError):
    """A scenario file failed to parse or validate."""
