"""GKP qubit generation by breeding generalized-photon-subtraction states.

High-precision wave-function algebra, breeding (approximate and exact),
fidelity and Glancy-Knill metrics, finite-resolution homodyne POVMs and the
with/without post-selection pipelines.
"""
__version__ = "0.1.0"

from .errors import (  # noqa: F401
    CancellationError,
    ContractError,
    ConventionError,
    ConvergenceError,
    DegenerateOutcomeError,
    DomainError,
    GKPBreedError,
    ProtocolError,
    ResolutionError,
)
from .numerics import DEFAULT_CONTEXT, PrecisionContext, using  # noqa: F401
