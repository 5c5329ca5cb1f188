"""Exception types raised across the package."""


class NozzleError(Exception):
    """Base class for all errors raised by vacuum_nozzle."""


class CavitationError(NozzleError, ArithmeticError):
    """Speed reached or exceeded the limit speed sqrt(2*C0): density would be <= 0."""


class NoConvergence(NozzleError, ArithmeticError):
    pass


class BranchError(NozzleError, ArithmeticError):
    """The root found is on the subsonic branch."""


class DomainError(NozzleError, ValueError):
    pass


class ResolutionError(NozzleError, ValueError):
    """Sampled data does not cover a point the operation needs."""


class DegenerateInput(NozzleError, ValueError):
    pass


class InsufficientSlices(NozzleError, ValueError):
    pass


class HyperbolicityLoss(NozzleError, ArithmeticError):
    """(d_r Phi)^2 - c^2 fell below the guard floor."""


class StepRejected(NozzleError, ArithmeticError):
    pass


class AbortedAt(NozzleError):
    """A march could not continue past radius ``r``.

    ``guard`` names the tripped guard and ``trace`` holds everything computed
    before the abort.
    """

    def __init__(self, r, guard, trace=None, detail=""):
        self.r = r
        self.guard = guard
        self.trace = trace
        self.detail = detail
        msg = f"march aborted at r={r:.6g}: {guard}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
