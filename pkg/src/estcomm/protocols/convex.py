"""Convex 1-Lipschitz integrands reduced to mean absolute difference.

Any convex 1-Lipschitz g on [0, 1] equals c + E_{z~D}|x - z| for a
probability measure D read off the right derivative (CDF (1 + g')/2) and
a shift c = g(0) - E_D[z].  Applying this to every slice f(x, .) turns
E f(x, y) into one shift average plus E|z - y| between the p-mixture of
the slice measures and q, which the absolute-difference protocol handles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..comm import ALICE, quantize_interval
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..errors import InputValidationError
from ..functions import TargetFn
from ..oracle import exact_expectation
from ..rng import derive_seed
from .absdiff import abs_protocol

__all__ = ["ConvexMeasure", "convex_to_measure", "convex_lipschitz_protocol"]


@dataclass(frozen=True)
class ConvexMeasure:
    """A measure on the grid {0, 1/m, ..., 1} plus a real shift in [-2, 2]."""

    cdf: np.ndarray
    shift: float

    def __post_init__(self):
        cdf = np.asarray(self.cdf, dtype=np.float64)
        object.__setattr__(self, "cdf", cdf)
        if cdf.ndim != 1 or cdf.size < 1:
            raise InputValidationError("cdf must be a non-empty 1-d array")
        if np.any(cdf < -1e-12) or np.any(cdf > 1.0 + 1e-12):
            raise InputValidationError("cdf values must lie in [0, 1]")
        if np.any(np.diff(cdf) < -1e-12):
            raise InputValidationError("cdf must be nondecreasing")
        if abs(cdf[-1] - 1.0) > 1e-9:
            raise InputValidationError("cdf must end at 1")
        if not -2.0 - 1e-9 <= self.shift <= 2.0 + 1e-9:
            raise InputValidationError("shift must lie in [-2, 2]")

    @property
    def grid_m(self) -> int:
        return self.cdf.size - 1

    def masses(self) -> np.ndarray:
        return np.clip(np.diff(self.cdf, prepend=0.0), 0.0, None)

    def expectation(self) -> float:
        m = max(self.grid_m, 1)
        return float(np.dot(self.masses(), np.arange(self.cdf.size) / m))

    def to_prob(self) -> ProbVec:
        w = self.masses()
        return ProbVec.from_dense(w / w.sum())

    def reconstruct(self) -> np.ndarray:
        """Grid values of shift + E_D|x - z|."""
        m = max(self.grid_m, 1)
        w = self.masses()
        grid = np.arange(self.cdf.size, dtype=np.float64)
        cum = np.cumsum(w)
        mom = np.cumsum(w * grid)
        left = grid * cum - mom
        right = (mom[-1] - mom) - grid * (cum[-1] - cum)
        return self.shift + (left + right) / m


def convex_to_measure(values: np.ndarray, tol: float = 1e-9) -> ConvexMeasure:
    """Extract (D, shift) from grid samples of a convex 1-Lipschitz function.

    The CDF of D is (1 + forward slope)/2; the shift anchors the value at 0.
    For functions whose kinks sit on the grid the reconstruction is exact at
    every grid point (the slopes and the value at 0 match, so the piecewise
    linear interpolants coincide).
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size < 2:
        raise InputValidationError("need at least 2 grid values")
    m = v.size - 1
    slopes = (v[1:] - v[:-1]) * m
    bad = np.nonzero(np.diff(slopes) < -tol)[0]
    if bad.size:
        raise InputValidationError(
            f"convexity fails between grid cells {int(bad[0])} and {int(bad[0]) + 1}")
    over = np.nonzero(np.abs(slopes) > 1.0 + tol)[0]
    if over.size:
        raise InputValidationError(
            f"slope magnitude exceeds 1 in grid cell {int(over[0])}")
    cdf_body = np.maximum.accumulate(np.clip((1.0 + slopes) / 2.0, 0.0, 1.0))
    cdf = np.append(cdf_body, 1.0)
    masses = np.diff(cdf, prepend=0.0)
    shift = float(v[0] - np.dot(masses, np.arange(m + 1) / m))
    return ConvexMeasure(cdf=cdf, shift=shift)


def convex_lipschitz_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                              cfg: ProtocolConfig) -> EstimateReport:
    """Estimate E f(x, y) for f convex 1-Lipschitz in y on a grid.

    Alice converts each p-supported slice to (D_x, c_x), sends the average
    shift quantized to eps/10, and the two parties run the
    absolute-difference protocol between the mixture of the D_x and q at
    budget 4 eps/5; slice reconstruction residuals must stay within the
    remaining eps/10.  The shift rides along with Alice's existing round.
    """
    p.require_domain(f.rows, "p")
    q.require_domain(f.cols, "q")
    eps = cfg.epsilon
    dense = f.dense()
    mix_masses = np.zeros(f.cols)
    cbar = 0.0
    worst = 0.0
    for x, px in zip(p.support, p.probs):
        meas = convex_to_measure(dense[x])
        worst = max(worst, float(np.max(np.abs(meas.reconstruct() - dense[x]))))
        mix_masses += px * meas.masses()
        cbar += px * meas.shift
    if worst > eps / 10.0:
        raise InputValidationError(
            f"slice reconstruction residual {worst:.3g} exceeds {eps / 10.0:.3g}")
    _, shift_bits, shift_dec = quantize_interval(cbar, -2.0, 2.0, eps / 5.0)
    mix = ProbVec.from_dense(np.clip(mix_masses, 0.0, None) / mix_masses.sum())

    sub = cfg.with_(epsilon=0.8 * eps, seed=derive_seed(cfg.seed, 0xC0))
    inner = abs_protocol(mix, q, sub)
    ledger = inner.ledger
    ledger.send(ALICE, shift_bits, "shift")
    return EstimateReport(
        estimate=shift_dec + inner.estimate,
        truth=exact_expectation(p, q, f),
        ledger=ledger,
        seed=cfg.seed,
        details={
            "shift": shift_dec,
            "reconstruction_residual": worst,
            "abs": inner.details,
        },
    )
