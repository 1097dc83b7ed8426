"""Extending any probability-vector protocol to bounded signed vectors.

Split each signed vector into positive and negative parts, normalize the
non-zero parts into genuine distributions, and run the wrapped protocol on
the at most four cross pairs.  The parties exchange the part masses as
rounded reals (precision eps over a known window [0, B]) and recombine

    estimate = sum_{s,t} (+-) |p_s|_1 |q_t|_1 estimate_{s,t}.

Each wrapped run fails with its own probability delta, so the combined
guarantee degrades to 4 delta, with additive error at most
eps (|p|_1 |q|_1 + |p|_1 + |q|_1).
"""

from __future__ import annotations

import math
from typing import Callable

from ..comm import ALICE, BOB, CostLedger, quantize_interval
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec, SignedVec
from ..functions import TargetFn
from ..oracle import exact_bilinear
from ..rng import derive_seed

__all__ = ["signed_extension"]

Protocol = Callable[[ProbVec, ProbVec, TargetFn, ProtocolConfig], EstimateReport]


def signed_extension(protocol: Protocol, pt: SignedVec, qt: SignedVec,
                     f: TargetFn, cfg: ProtocolConfig,
                     norm_bound: float | None = None) -> EstimateReport:
    if pt.domain_size != f.rows or qt.domain_size != f.cols:
        from ..errors import DimensionMismatchError
        raise DimensionMismatchError("signed vectors do not match f's domains")
    if norm_bound is None:
        top = max(1.0, pt.l1_norm(), qt.l1_norm())
        norm_bound = float(2 ** math.ceil(math.log2(top))) if top > 1.0 else 1.0

    p_parts = [part.normalized() for part in pt.split()]
    q_parts = [part.normalized() for part in qt.split()]

    ledger = CostLedger()
    p_dec = []
    for mass, _ in p_parts:
        _, bits, dec = quantize_interval(mass, 0.0, norm_bound, cfg.epsilon)
        ledger.send(ALICE, bits, "norm")
        p_dec.append(dec)
    q_dec = []
    for mass, _ in q_parts:
        _, bits, dec = quantize_interval(mass, 0.0, norm_bound, cfg.epsilon)
        ledger.send(BOB, bits, "norm")
        q_dec.append(dec)

    estimate = 0.0
    runs = 0
    for si, (p_mass, p_dir) in enumerate(p_parts):
        for ti, (q_mass, q_dir) in enumerate(q_parts):
            if p_dir is None or q_dir is None:
                continue
            sub_cfg = cfg.with_(seed=derive_seed(cfg.seed, si, ti))
            rep = protocol(p_dir, q_dir, f, sub_cfg)
            ledger.extend(rep.ledger)
            sign = 1.0 if si == ti else -1.0
            # Bob recombines with his exact masses and Alice's decoded ones.
            estimate += sign * p_dec[si] * q_mass * rep.estimate
            runs += 1

    truth = exact_bilinear(pt, qt, f)
    bound = cfg.epsilon * (pt.l1_norm() * qt.l1_norm() + pt.l1_norm() + qt.l1_norm())
    return EstimateReport(float(estimate), truth, ledger, cfg.seed,
                          details={"sub_runs": runs, "norm_bound": norm_bound,
                                   "error_bound": bound})
