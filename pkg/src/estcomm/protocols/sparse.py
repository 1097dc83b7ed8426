"""Estimation for row-sparse targets by reduction to collision estimation.

A matrix with at most s non-zeros per row is a sum of s partial maps
(x -> single column).  Writing each map's coefficients in binary up to
B = ceil(log2(4s/eps)) digits expresses the target, within entrywise
eps/4, as a signed dyadic combination of 0/1 partial maps.  Each 0/1 map
M with column map pi satisfies

    E_{p,q}[M] = <pushforward of p through pi, q extended by a sink>

so one collision-protocol run per map (at accuracy eps/(4s), confidence
split across the maps) recombines into the overall estimate.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import CostLedger
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..functions import TargetFn
from ..oracle import exact_expectation
from ..rng import derive_seed
from .equality import eq_protocol

__all__ = ["sparse_protocol", "one_sparse_layers", "dyadic_terms"]


def one_sparse_layers(f: TargetFn) -> list[dict[int, tuple[int, float]]]:
    """Split f into layers with at most one non-zero per row each."""
    a = f.dense()
    layers: list[dict[int, tuple[int, float]]] = []
    for x in range(f.rows):
        (cols,) = np.nonzero(a[x])
        for i, y in enumerate(cols):
            if i == len(layers):
                layers.append({})
            layers[i][x] = (int(y), float(a[x, y]))
    return layers


def dyadic_terms(layer: dict[int, tuple[int, float]], depth: int
                 ) -> tuple[list[tuple[float, dict[int, int]]], float]:
    """Signed powers of two whose 0/1 maps rebuild the layer.

    Returns (terms, worst dropped magnitude); each term is
    (signed weight 2**-b, {x: y}).  Exact dyadic coefficients produce no
    drop at all.
    """
    terms: dict[tuple[int, int], dict[int, int]] = {}
    worst = 0.0
    for x, (y, c) in layer.items():
        mag = abs(c)
        sign = 1 if c > 0 else -1
        acc = 0.0
        for b in range(depth + 1):
            w = 2.0 ** -b
            if acc + w <= mag + 1e-15:
                acc += w
                terms.setdefault((sign, b), {})[x] = y
        worst = max(worst, mag - acc)
    out = [(s * 2.0 ** -b, mp) for (s, b), mp in sorted(terms.items())]
    return out, worst


def _push_through(p: ProbVec, mapping: dict[int, int], cols: int) -> ProbVec:
    """Pushforward of p through a partial map; unmapped mass goes to a sink."""
    sink = cols
    acc: dict[int, float] = {}
    for x, mass in zip(p.support, p.probs):
        y = mapping.get(int(x), sink)
        acc[y] = acc.get(y, 0.0) + float(mass)
    return ProbVec.from_mapping(cols + 1, acc)


def sparse_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                    cfg: ProtocolConfig) -> EstimateReport:
    p.require_domain(f.rows, "p")
    q.require_domain(f.cols, "q")
    layers = one_sparse_layers(f)
    s = max(len(layers), 1)
    depth = int(math.ceil(math.log2(4.0 * s / cfg.epsilon)))
    eps_sub = cfg.epsilon / (4.0 * s)

    all_terms: list[tuple[float, dict[int, int]]] = []
    worst_drop = 0.0
    for layer in layers:
        terms, drop = dyadic_terms(layer, depth)
        all_terms.extend(terms)
        worst_drop = max(worst_drop, drop)

    q_ext = ProbVec.from_mapping(f.cols + 1,
                                 dict(zip(q.support.tolist(), q.probs.tolist())))
    delta_sub = cfg.delta / max(len(all_terms), 1)
    ledger = CostLedger()
    estimate = 0.0
    for idx, (weight, mapping) in enumerate(all_terms):
        p_push = _push_through(p, mapping, f.cols)
        sub_cfg = cfg.with_(epsilon=eps_sub, delta=delta_sub,
                            seed=derive_seed(cfg.seed, idx))
        rep = eq_protocol(p_push, q_ext, sub_cfg)
        ledger.extend(rep.ledger)
        estimate += weight * rep.estimate

    truth = exact_expectation(p, q, f)
    return EstimateReport(float(estimate), truth, ledger, cfg.seed,
                          details={"s": s, "terms": len(all_terms),
                                   "depth": depth, "dropped": worst_drop})
