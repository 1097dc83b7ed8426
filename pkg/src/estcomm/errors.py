"""Exception hierarchy for the estimation-protocol library.

Everything raised on purpose derives from :class:`EstcommError` so callers
(and the service layer) can distinguish bad inputs from genuine bugs.
"""


class EstcommError(Exception):
    """Base class for all library-specific errors."""


class InputValidationError(EstcommError, ValueError):
    """An argument violates a documented precondition."""


class DimensionMismatchError(InputValidationError):
    """Distributions and target function disagree on domain sizes."""


class RankApproximationError(EstcommError):
    """A low-rank protocol was asked for a rank its input does not support.

    Carries the entrywise error actually achieved so callers can report it.
    """

    def __init__(self, rank: int, achieved: float, budget: float):
        self.rank = rank
        self.achieved = achieved
        self.budget = budget
        super().__init__(
            f"rank-{rank} truncation misses the entrywise budget: "
            f"achieved {achieved:.6g} > allowed {budget:.6g}"
        )


class EnumerationCapError(InputValidationError):
    """A brute-force diagnostic was asked to enumerate past its hard cap."""


class DiagnosticFailure(EstcommError):
    """A certified numerical identity failed to hold within tolerance."""
