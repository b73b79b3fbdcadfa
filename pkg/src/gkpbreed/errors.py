"""Exception hierarchy shared by every module."""


class GKPBreedError(Exception):
    """Base class for all library errors."""


class DomainError(GKPBreedError, ValueError):
    """An argument lies outside the domain of the operation."""


class CancellationError(GKPBreedError, ArithmeticError):
    """Precision doubling disagreed beyond tolerance; raise mantissa_bits."""


class ConvergenceError(GKPBreedError, ArithmeticError):
    """An iterative or adaptive routine ran out of budget.

    ``best`` carries the best estimate reached before giving up.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ContractError(GKPBreedError, ValueError):
    """An input violated a documented contract (e.g. not normalized)."""


class DegenerateOutcomeError(GKPBreedError, ArithmeticError):
    """A conditional state vanished (zero norm or undefined phase)."""


class ProtocolError(GKPBreedError, RuntimeError):
    """A pipeline step could not produce a valid result."""


class ResolutionError(GKPBreedError, ArithmeticError):
    """Node refinement in a finite-resolution window did not converge."""


class ConventionError(GKPBreedError, ArithmeticError):
    """A self-check of a convention (e.g. Zak cell completeness) failed."""
