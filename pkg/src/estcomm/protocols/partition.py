"""Greedy interval partitions of ordered domains.

A weak partition keeps every interval's mass at most beta, except that
atoms heavier than beta are isolated as singleton intervals (a point mass
cannot be subdivided, and isolating it lets callers treat it exactly).  A
strong partition additionally caps every non-atom interval's width at a
beta fraction of the domain span.

Interval counts: weak partitions stay below 2/beta + 1 + (heavy atoms)
because consecutive interval pairs hold more than beta mass.  Strong
partitions usually do too, but an input can force a split for width right
after one for mass, so the guaranteed ceiling doubles to 4/beta + 1 +
(heavy atoms); the validator enforces the guaranteed bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dist import ProbVec
from ..errors import InputValidationError

__all__ = ["PartitionSpec", "interval_partition", "common_refinement", "interval_stats"]


@dataclass(frozen=True)
class PartitionSpec:
    """Ordered cover of {0..N-1} by disjoint intervals [start, end]."""

    domain_size: int
    starts: np.ndarray          # first index of each interval, increasing
    ends: np.ndarray            # last index of each interval
    beta: float
    strong: bool
    atom_flags: np.ndarray = field(default=None)  # singleton heavy atoms

    def __post_init__(self):
        starts = np.asarray(self.starts, dtype=np.int64)
        ends = np.asarray(self.ends, dtype=np.int64)
        object.__setattr__(self, "starts", starts)
        object.__setattr__(self, "ends", ends)
        if self.atom_flags is None:
            object.__setattr__(self, "atom_flags", np.zeros(len(starts), dtype=bool))
        if len(starts) == 0 or starts[0] != 0 or ends[-1] != self.domain_size - 1:
            raise InputValidationError("intervals must cover the domain")
        if np.any(ends < starts) or np.any(starts[1:] != ends[:-1] + 1):
            raise InputValidationError("intervals must be disjoint, ordered, contiguous")

    @property
    def size(self) -> int:
        return len(self.starts)

    def interval_of(self, x: np.ndarray | int):
        """Index of the interval containing each point."""
        return np.searchsorted(self.starts, x, side="right") - 1

    def widths_frac(self) -> np.ndarray:
        """Interval widths as fractions of the domain span (0 for N == 1)."""
        span = max(self.domain_size - 1, 1)
        return (self.ends - self.starts) / span

    def internal_boundaries(self) -> np.ndarray:
        return self.starts[1:]


def interval_partition(p: ProbVec, beta: float, strong: bool = False) -> PartitionSpec:
    """Greedy left-to-right partition of p's domain."""
    if not 0.0 < beta <= 1.0:
        raise InputValidationError(f"beta must lie in (0, 1], got {beta}")
    n = p.domain_size
    pd = p.dense()
    span = max(n - 1, 1)
    starts, ends, atoms = [], [], []
    cur = 0
    cur_mass = 0.0

    def close(upto: int) -> None:
        nonlocal cur, cur_mass
        if cur <= upto:
            starts.append(cur)
            ends.append(upto)
            atoms.append(False)
        cur = upto + 1
        cur_mass = 0.0

    for x in range(n):
        px = pd[x]
        if px > beta:
            close(x - 1)
            starts.append(x)
            ends.append(x)
            atoms.append(True)
            cur = x + 1
            cur_mass = 0.0
            continue
        if x > cur and cur_mass + px > beta:
            close(x - 1)
        elif strong and x > cur and (x - cur) / span > beta:
            close(x - 1)
        cur_mass += px
    close(n - 1)

    spec = PartitionSpec(n, np.array(starts), np.array(ends), beta, strong,
                         np.array(atoms, dtype=bool))
    _validate_counts(spec, pd)
    return spec


def _validate_counts(spec: PartitionSpec, pd: np.ndarray) -> None:
    n_atoms = int(spec.atom_flags.sum())
    per_reason = 4.0 if spec.strong else 2.0
    bound = per_reason / spec.beta + 1.0 + n_atoms
    if spec.size > bound + 1e-9:
        raise InputValidationError(
            f"partition produced {spec.size} intervals, above the {bound:.1f} bound")
    masses = np.add.reduceat(pd, spec.starts)
    if np.any(masses[~spec.atom_flags] > spec.beta + 1e-12):
        raise InputValidationError("non-atom interval exceeds the mass cap")
    if spec.strong:
        widths = spec.widths_frac()
        if np.any(widths[~spec.atom_flags] > spec.beta + 1e-12):
            raise InputValidationError("non-atom interval exceeds the width cap")


def common_refinement(a: PartitionSpec, b: PartitionSpec) -> PartitionSpec:
    """The coarsest partition refining both (boundary union)."""
    if a.domain_size != b.domain_size:
        raise InputValidationError("refinement needs a common domain")
    starts = np.union1d(a.starts, b.starts)
    ends = np.append(starts[1:] - 1, a.domain_size - 1)
    return PartitionSpec(a.domain_size, starts, ends,
                         min(a.beta, b.beta), a.strong and b.strong,
                         np.zeros(len(starts), dtype=bool))


def interval_stats(p: ProbVec, spec: PartitionSpec) -> tuple[np.ndarray, np.ndarray]:
    """(mass, conditional mean index) of p on each interval.

    Zero-mass intervals get their midpoint as the conventional mean; any
    consumer weighs it by the zero mass anyway.
    """
    pd = p.dense()
    masses = np.add.reduceat(pd, spec.starts)
    first_moment = np.add.reduceat(pd * np.arange(p.domain_size), spec.starts)
    mid = (spec.starts + spec.ends) / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        means = np.where(masses > 0.0, first_moment / np.maximum(masses, 1e-300), mid)
    return masses, means
