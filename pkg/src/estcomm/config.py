"""Run configuration and the uniform protocol result record."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from .comm import CostLedger
from .errors import InputValidationError

__all__ = ["AccessMode", "ProtocolConfig", "EstimateReport"]


class AccessMode(enum.Enum):
    """How a party turns knowledge of its own distribution into numbers.

    FULL_DISTRIBUTION: conditional expectations over a party's own
    distribution are computed exactly.  SAMPLE_ONLY: they are replaced by
    averages over samples the party draws locally (free of communication).
    """

    FULL_DISTRIBUTION = "full"
    SAMPLE_ONLY = "sample"


@dataclass(frozen=True)
class ProtocolConfig:
    """Immutable knobs shared by every protocol run.

    ``constants`` overrides named internal constants (sample counts,
    partition thresholds); unknown names are ignored by protocols that do
    not read them.
    """

    epsilon: float
    delta: float = 1.0 / 3.0
    seed: int = 0
    access: AccessMode = AccessMode.FULL_DISTRIBUTION
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise InputValidationError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if not 0.0 < self.delta < 0.5:
            raise InputValidationError(f"delta must lie in (0, 1/2), got {self.delta}")
        if isinstance(self.access, str):
            object.__setattr__(self, "access", AccessMode(self.access))

    def constant(self, name: str, default: float) -> float:
        return float(self.constants.get(name, default))

    def with_(self, **changes) -> "ProtocolConfig":
        return replace(self, **changes)


@dataclass
class EstimateReport:
    """What every protocol returns: the estimate plus its audit trail.

    ``truth`` is the exact expectation recomputed from the full inputs (the
    simulator knows both distributions even when the parties do not);
    ``details`` carries protocol-specific internals for diagnostics and is
    never part of the communication.
    """

    estimate: float
    truth: float | None
    ledger: CostLedger
    seed: int
    details: dict = field(default_factory=dict)

    @property
    def abs_error(self) -> float | None:
        if self.truth is None:
            return None
        return abs(self.estimate - self.truth)

    def within(self, epsilon: float) -> bool:
        err = self.abs_error
        if err is None:
            raise InputValidationError("no recorded truth to compare against")
        return err <= epsilon


def amplification_reps(delta: float, base_delta: float = 0.2) -> int:
    """Median-trick repetition count driving failure below ``delta``.

    A single run fails with probability at most ``base_delta``; the median
    of r independent runs fails only if half of them do, so r grows like
    log(1/delta).  Returns an odd count, 1 when no amplification is needed.
    """
    if delta >= base_delta:
        return 1
    gap = 0.5 - base_delta
    r = math.ceil(math.log(1.0 / delta) / (2.0 * gap * gap))
    return r if r % 2 == 1 else r + 1


__all__.append("amplification_reps")
