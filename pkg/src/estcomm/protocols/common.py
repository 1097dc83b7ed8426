"""Helpers shared across protocol implementations."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..comm import CostLedger
from ..config import ProtocolConfig, amplification_reps
from ..rng import stream

__all__ = ["run_amplified", "sampled_mean"]


def run_amplified(
    cfg: ProtocolConfig,
    base_delta: float,
    core: Callable[[np.random.Generator, CostLedger], float],
) -> tuple[float, CostLedger, int]:
    """Run ``core`` enough times that the median meets ``cfg.delta``.

    ``core`` receives a fresh independent stream and the shared ledger per
    repetition; every repetition's traffic is billed.  Returns
    (median estimate, ledger, repetition count).
    """
    reps = amplification_reps(cfg.delta, base_delta)
    ledger = CostLedger()
    estimates = [core(stream(cfg.seed, rep), ledger) for rep in range(reps)]
    return float(np.median(estimates)), ledger, reps


def sampled_mean(values_at: Callable[[np.ndarray], np.ndarray],
                 sampler, rng: np.random.Generator, m: int) -> float:
    """Monte Carlo mean of ``values_at`` over ``m`` draws from ``sampler``."""
    draws = sampler.sample(rng, m)
    return float(np.mean(values_at(draws)))
