"""Threshold estimation on ordered domains: Pr[x >= y] for x ~ p, y ~ q.

Both parties partition the domain into intervals of mass at most beta.
Across distinct refinement intervals the comparison is decided by order
alone, so that part is computed exactly from exchanged interval masses.
Only the within-interval slice needs sampling, and each sampled summand
is at most beta, which is what lets beta ~ eps^(2/3) undercut the
1/eps^2 cost of naive sampling.  Heavy atoms of q are exchanged exactly
rather than sampled.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import ALICE, BOB, CostLedger, index_bits, quantize_interval
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from .common import run_amplified
from .partition import PartitionSpec, common_refinement, interval_partition, interval_stats

__all__ = ["gt_protocol", "gt_interval_decomposition", "threshold_probability"]

BASE_DELTA = 0.2


def threshold_probability(p: ProbVec, q: ProbVec) -> float:
    """Exact Pr[x >= y] for independent x ~ p, y ~ q."""
    p.require_domain(q.domain_size, "p")
    return float(np.dot(p.probs, q.cdf_at(p.support)))


def quantized_interval_masses(p_masses: np.ndarray, eta: float) -> tuple[np.ndarray, int]:
    """Round per-interval masses to precision ``eta``; returns (values, bits)."""
    bits = 0
    out = np.empty(len(p_masses))
    for j, v in enumerate(p_masses):
        _, b, dec = quantize_interval(float(v), 0.0, 1.0, eta)
        bits += b
        out[j] = dec
    return out, bits


def gt_protocol(p: ProbVec, q: ProbVec, cfg: ProtocolConfig) -> EstimateReport:
    """Two-round threshold estimate accurate to epsilon w.p. >= 1 - delta.

    Bob opens with his partition endpoints; Alice answers with hers, the
    refined interval masses of p at precision eps^3, and k samples from p.
    Bob combines the exact across-interval sum, the exact heavy-atom sum,
    and the sampled within-interval mean.
    """
    p.require_domain(q.domain_size, "p")
    eps = cfg.epsilon
    n = p.domain_size
    beta = min(1.0, cfg.constant("gt_beta_c", 1.0) * eps ** (2.0 / 3.0))
    k = math.ceil(cfg.constant("gt_sample_c", 4.0) * (beta / eps) ** 2)

    q_part = interval_partition(q, beta)
    p_part = interval_partition(p, beta)
    ref = common_refinement(p_part, q_part)
    p_masses, _ = interval_stats(p, ref)
    q_masses, _ = interval_stats(q, ref)
    p_tilde, mass_bits = quantized_interval_masses(p_masses, eps ** 3)

    # Heavy atoms of q are singleton refinement intervals; x = y is forced
    # there, so the within-interval term is exactly p_j * q_j.
    atom_here = (ref.starts == ref.ends) & (q_masses > beta)
    atom_exact = float(np.dot(p_tilde[atom_here], q_masses[atom_here]))
    atom_starts = ref.starts[atom_here]

    prefix_below = np.concatenate(([0.0], np.cumsum(q_masses)[:-1]))
    cross = float(np.dot(p_tilde, prefix_below))
    interval_base = q.cdf_at(ref.starts - 1)

    def core(rng: np.random.Generator, ledger: CostLedger) -> float:
        ledger.send(BOB, q_part.size * index_bits(n), "partition")
        ledger.send(ALICE, p_part.size * index_bits(n), "partition")
        ledger.send(ALICE, mass_bits, "interval-masses")
        xs = p.sample(rng, k)
        ledger.send(ALICE, k * index_bits(n), "samples")
        h = q.cdf_at(xs) - interval_base[ref.interval_of(xs)]
        if len(atom_starts):
            h[np.isin(xs, atom_starts)] = 0.0
        return cross + atom_exact + float(np.mean(h))

    estimate, ledger, reps = run_amplified(cfg, BASE_DELTA, core)
    return EstimateReport(
        estimate=estimate,
        truth=threshold_probability(p, q),
        ledger=ledger,
        seed=cfg.seed,
        details={
            "beta": beta,
            "k": k,
            "reps": reps,
            "refinement_size": int(ref.size),
            "q_heavy_atoms": int(atom_here.sum()),
        },
    )


def gt_interval_decomposition(p: ProbVec, q: ProbVec, spec: PartitionSpec) -> dict:
    """Exact split of Pr[x >= y] into across- and within-interval parts.

    Every term is evaluated from the full distributions, so the two parts
    recombine to the exact threshold probability up to float summation.
    """
    p.require_domain(spec.domain_size, "p")
    q.require_domain(spec.domain_size, "q")
    p_masses, _ = interval_stats(p, spec)
    q_masses, _ = interval_stats(q, spec)
    prefix_below = np.concatenate(([0.0], np.cumsum(q_masses)[:-1]))
    across = float(np.dot(p_masses, prefix_below))
    base = q.cdf_at(spec.starts - 1)
    h = q.cdf_at(p.support) - base[spec.interval_of(p.support)]
    within = float(np.dot(p.probs, h))
    return {"across": across, "within": within, "total": across + within}
