"""Collision-probability estimation: the inner product <p, q>.

Pipeline for estimating sum_x p(x) q(x) to additive eps with communication
scaling like (1/eps)^(2/3) up to logs, independent of the domain size:

1. Truncate: drop entries below an internal threshold e = eps/6.  Both
   truncations have support at most 1/e, and
   0 <= <p, q> - <p^e, q^e> <= 2e  (each dropped side costs at most
   max-dropped-mass times the other vector's total).
2. Hash the surviving supports into m = ceil(40/e^2) shared-random
   buckets and push the masses forward.  With probability >= 0.9 the hash
   is injective on the union of supports and bucket inner products agree
   with the truncated ones exactly.
3. Split Alice's hashed vector at beta = e^(2/3).  She ships her heavy
   buckets; Bob returns the heavy part of the inner product against his
   exact vector, his total hashed mass, and t = ceil(10/e^(2/3)) samples
   from his normalized hashed vector.  Alice finishes with the importance
   estimate (mass/t) * sum over samples of her light values, each summand
   below beta, so the sample average concentrates within 2e.

The per-stage budgets (2e + e + e + 2e) sum to eps.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import ALICE, BOB, CostLedger, index_bits, quantize_interval
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec, SignedVec
from ..errors import DimensionMismatchError, InputValidationError
from ..functions import TargetFn  # noqa: F401  (signature parity for adapters)
from ..rng import mix64
from .common import run_amplified

__all__ = ["heavy_truncate", "eq_protocol", "inner_product_truth"]

BASE_DELTA = 0.2


def heavy_truncate(p: ProbVec, eps: float) -> SignedVec:
    """Keep only entries with mass >= eps; the result is a sub-distribution."""
    if not 0.0 < eps < 1.0:
        raise InputValidationError("truncation threshold must lie in (0, 1)")
    keep = p.probs >= eps
    return SignedVec(p.domain_size, p.support[keep], p.probs[keep])


def inner_product_truth(p: ProbVec, q: ProbVec) -> float:
    """Exact <p, q> over the common domain."""
    if p.domain_size != q.domain_size:
        raise DimensionMismatchError("inner product needs a common domain")
    common, pi, qi = np.intersect1d(p.support, q.support, assume_unique=True,
                                    return_indices=True)
    del common
    return float(p.probs[pi] @ q.probs[qi])


def _pushforward(trunc: SignedVec, key: int, m: int) -> dict[int, float]:
    out: dict[int, float] = {}
    for x, v in zip(trunc.support, trunc.values):
        b = mix64(key, int(x)) % m
        out[b] = out.get(b, 0.0) + float(v)
    return out


def eq_protocol(p: ProbVec, q: ProbVec, cfg: ProtocolConfig) -> EstimateReport:
    if p.domain_size != q.domain_size:
        raise DimensionMismatchError("eq protocol needs a common domain")
    e = cfg.epsilon / 6.0
    m = int(math.ceil(cfg.constant("eq_m_c", 40.0) / e ** 2))
    beta = e ** (2.0 / 3.0)
    t = int(math.ceil(cfg.constant("eq_t_c", 10.0) / e ** (2.0 / 3.0)))
    p_trunc = heavy_truncate(p, e)
    q_trunc = heavy_truncate(q, e)

    def core(rng: np.random.Generator, ledger: CostLedger) -> float:
        key = int(rng.integers(0, 1 << 63))
        ph = _pushforward(p_trunc, key, m)
        qh = _pushforward(q_trunc, key, m)
        bucket_bits = index_bits(m)

        # Alice ships her heavy buckets.
        heavy = {b: v for b, v in ph.items() if v >= beta}
        prob_bits = 0
        heavy_dec = {}
        for b, v in heavy.items():
            _, prob_bits, dec = quantize_interval(v, 0.0, 1.0, e * beta)
            heavy_dec[b] = dec
        ledger.send(ALICE, len(heavy) * (bucket_bits + prob_bits), "heavy")

        # Bob answers with the heavy inner product, his mass, and samples.
        heavy_sum = sum(dec * qh.get(b, 0.0) for b, dec in heavy_dec.items())
        _, hs_bits, heavy_sum_dec = quantize_interval(heavy_sum, 0.0, 1.0, e)
        ledger.send(BOB, hs_bits, "heavy-sum")
        q_mass = sum(qh.values())
        _, nb, q_mass_dec = quantize_interval(q_mass, 0.0, 1.0, 2.0 * e)
        ledger.send(BOB, nb, "mass")
        light_est = 0.0
        if q_mass > 0.0 and t > 0:
            buckets = np.array(sorted(qh), dtype=np.int64)
            weights = np.array([qh[b] for b in buckets])
            q_norm = ProbVec(m, buckets, weights / weights.sum())
            draws = q_norm.sample(rng, t)
            ledger.send(BOB, t * bucket_bits, "samples")
            light_vals = np.array([ph.get(int(b), 0.0) for b in draws])
            light_vals[light_vals >= beta] = 0.0  # heavy buckets already counted
            light_est = q_mass_dec * float(light_vals.mean())
        return heavy_sum_dec + light_est

    estimate, ledger, reps = run_amplified(cfg, BASE_DELTA, core)
    truth = inner_product_truth(p, q)
    return EstimateReport(estimate, truth, ledger, cfg.seed,
                          details={"m": m, "beta": beta, "t": t, "reps": reps,
                                   "support_p": p_trunc.nnz,
                                   "support_q": q_trunc.nnz})
