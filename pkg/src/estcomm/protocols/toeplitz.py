"""Diagonal step functions f(x, y) = a_{x-y} via shifted threshold calls.

A diagonal profile with r jumps is base + sum of c_i * 1{x - y >= d_i},
and each indicator is a threshold comparison after shifting one side by
|d_i| on an extended domain.  The budget splits evenly: each of the r
threshold calls runs at eps / sum|c_i| accuracy and delta / r failure.
"""

from __future__ import annotations

from ..comm import CostLedger
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..errors import InputValidationError
from ..functions import TargetFn
from ..rng import derive_seed
from .ordered import gt_protocol, threshold_probability

__all__ = ["toeplitz_protocol", "shifted_pair"]


def shifted_pair(p: ProbVec, q: ProbVec, d: int) -> tuple[ProbVec, ProbVec]:
    """Embed (p, q) so that x - y >= d becomes x' >= y' on a common domain."""
    n = p.domain_size
    ext = n + abs(d)
    if d >= 0:
        ps = ProbVec(ext, p.support, p.probs)
        qs = ProbVec(ext, q.support + d, q.probs)
    else:
        ps = ProbVec(ext, p.support - d, p.probs)
        qs = ProbVec(ext, q.support, q.probs)
    return ps, qs


def toeplitz_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                      cfg: ProtocolConfig) -> EstimateReport:
    """Estimate E a_{x-y} by recombining one threshold estimate per jump."""
    if f.family != "toeplitz":
        raise InputValidationError("toeplitz protocol needs a toeplitz family")
    p.require_domain(f.rows, "p")
    q.require_domain(f.cols, "q")
    base = float(f.params["base"])
    changes = list(f.params["changes"])
    total_jump = sum(abs(c) for _, c in changes)

    ledger = CostLedger()
    estimate = base
    truth = base
    term_details = []
    if changes:
        eps_term = min(0.9, cfg.epsilon / total_jump)
        delta_term = cfg.delta / len(changes)
        for t, (d, c) in enumerate(changes):
            ps, qs = shifted_pair(p, q, d)
            sub = cfg.with_(epsilon=eps_term, delta=delta_term,
                            seed=derive_seed(cfg.seed, 0x70, t))
            rep = gt_protocol(ps, qs, sub)
            ledger.extend(rep.ledger)
            estimate += c * rep.estimate
            truth += c * threshold_probability(ps, qs)
            term_details.append({"shift": d, "weight": c, "estimate": rep.estimate})

    return EstimateReport(
        estimate=estimate,
        truth=truth,
        ledger=ledger,
        seed=cfg.seed,
        details={"base": base, "terms": term_details},
    )
