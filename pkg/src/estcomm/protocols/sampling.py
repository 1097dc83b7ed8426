"""Baseline estimator: average f over shared sampled pairs.

Both parties draw k = ceil(4 / eps^2) samples from their own
distributions.  For each pair the value f(x_i, y_i) is established by a
short exchange (Alice ships her sample, Bob answers with the value rounded
to precision eps), and the estimate is the average of the per-pair values.
The sample average concentrates within eps/2 by Chebyshev and the rounding
adds at most eps/2 more.

The paired-index family gets its constant-size evaluation instead: the two
parties exchange their index halves and the two referenced bits, which
determines the value exactly.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import ALICE, BOB, CostLedger, index_bits, quantize, real_bits
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..functions import TargetFn
from ..oracle import exact_expectation
from .common import run_amplified

__all__ = ["random_sampling_protocol"]

BASE_DELTA = 0.2


def random_sampling_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                             cfg: ProtocolConfig) -> EstimateReport:
    p.require_domain(f.rows, "p")
    q.require_domain(f.cols, "q")
    k = int(cfg.constant("sampling_k", math.ceil(4.0 / cfg.epsilon ** 2)))

    def core(rng: np.random.Generator, ledger: CostLedger) -> float:
        xs = p.sample(rng, k)
        ys = q.sample(rng, k)
        if f.family == "double_index":
            return _double_index_round(f, xs, ys, ledger)
        ledger.send(ALICE, k * index_bits(f.rows), "samples")
        exact = f.block(xs, ys)
        vbits = real_bits(cfg.epsilon)
        ledger.send(BOB, k * vbits, "values")
        decoded = np.array([quantize(v, cfg.epsilon)[2] for v in exact])
        return float(decoded.mean())

    estimate, ledger, reps = run_amplified(cfg, BASE_DELTA, core)
    truth = exact_expectation(p, q, f)
    return EstimateReport(estimate, truth, ledger, cfg.seed,
                          details={"k": k, "reps": reps})


def _double_index_round(f: TargetFn, xs: np.ndarray, ys: np.ndarray,
                        ledger: CostLedger) -> float:
    """Exact pairwise evaluation in three batched rounds.

    Alice announces her index halves, Bob answers with his halves plus the
    bits of his strings that Alice's indices select, and Alice finishes with
    the bits Bob's indices select.  k + 1 bits per pair per side.
    """
    kbits = index_bits(f.params["L"])
    n = len(xs)
    ledger.send(ALICE, n * kbits, "pair-index")
    ledger.send(BOB, n * (kbits + 1), "pair-index+bit")
    ledger.send(ALICE, n * 1, "pair-bit")
    vals = f.block(xs, ys)  # both parties now hold every value exactly
    return float(vals.mean())
