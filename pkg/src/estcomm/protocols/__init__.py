"""Protocol registry: every estimator behind one (p, q, f, cfg) signature.

``run_protocol`` dispatches by name; adapters bridge protocols that do not
take a target function (their target is implied by the family) or that
need a resolved extra parameter (rank, head size).  Estimates are always
in the units of the supplied family so truth comparisons line up.
"""

from __future__ import annotations

import numpy as np

from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..errors import InputValidationError
from ..functions import TargetFn
from .absdiff import abs_interval_decomposition, abs_protocol, mean_abs_difference
from .convex import ConvexMeasure, convex_lipschitz_protocol, convex_to_measure
from .debias import debiasing_protocol
from .equality import eq_protocol, heavy_truncate, inner_product_truth
from .lowrank import svd_protocol
from .ordered import gt_interval_decomposition, gt_protocol, threshold_probability
from .partition import PartitionSpec, common_refinement, interval_partition, interval_stats
from .sampling import random_sampling_protocol
from .signed import signed_extension
from .sketch import real_ip_sketch
from .smooth import smooth_protocol
from .sparse import sparse_protocol
from .spectral import spectral_hybrid_protocol, spectral_protocol
from .toeplitz import toeplitz_protocol

__all__ = [
    "PROTOCOLS",
    "run_protocol",
    "minimal_adequate_rank",
    "random_sampling_protocol",
    "debiasing_protocol",
    "svd_protocol",
    "spectral_protocol",
    "spectral_hybrid_protocol",
    "eq_protocol",
    "sparse_protocol",
    "gt_protocol",
    "abs_protocol",
    "convex_lipschitz_protocol",
    "smooth_protocol",
    "toeplitz_protocol",
    "signed_extension",
    "real_ip_sketch",
    "heavy_truncate",
    "inner_product_truth",
    "threshold_probability",
    "mean_abs_difference",
    "gt_interval_decomposition",
    "abs_interval_decomposition",
    "interval_partition",
    "common_refinement",
    "interval_stats",
    "PartitionSpec",
    "ConvexMeasure",
    "convex_to_measure",
]


def minimal_adequate_rank(f: TargetFn, epsilon: float) -> int:
    """Smallest r whose rank-r truncation is entrywise within epsilon/2."""
    u, s, vt = f.svd()
    budget = epsilon / 2.0
    resid = np.array(f.dense(), dtype=np.float64, copy=True)
    rmax = min(f.rows, f.cols)
    for r in range(1, rmax + 1):
        resid -= np.outer(u[:, r - 1] * s[r - 1], vt[r - 1])
        if np.abs(resid).max() <= budget:
            return r
    return rmax


def _expect_family(f: TargetFn | None, allowed: tuple[str, ...], name: str) -> TargetFn:
    if f is None:
        raise InputValidationError(f"{name} protocol needs a target family")
    if f.family not in allowed:
        raise InputValidationError(
            f"{name} protocol targets {allowed}, got family {f.family!r}")
    return f


def _run_sampling(p, q, f, cfg):
    return random_sampling_protocol(p, q, f, cfg)


def _run_debias(p, q, f, cfg):
    return debiasing_protocol(p, q, f, cfg)


def _run_svd(p, q, f, cfg):
    r = int(cfg.constant("svd_rank", 0))
    if r <= 0:
        r = minimal_adequate_rank(f, cfg.epsilon)
    return svd_protocol(p, q, f, cfg, r)


def _run_spectral(p, q, f, cfg):
    return spectral_protocol(p, q, f, cfg)


def _run_hybrid(p, q, f, cfg):
    return spectral_hybrid_protocol(p, q, f, cfg, int(cfg.constant("hybrid_t", 2)))


def _run_eq(p, q, f, cfg):
    if f is not None:
        _expect_family(f, ("eq",), "eq")
    return eq_protocol(p, q, cfg)


def _run_gt(p, q, f, cfg):
    if f is not None:
        _expect_family(f, ("gt",), "gt")
    return gt_protocol(p, q, cfg)


def _run_abs(p, q, f, cfg):
    rep = abs_protocol(p, q, cfg)
    if f is not None:
        _expect_family(f, ("abs_grid", "distance"), "abs")
        denom = f.params["m"] if f.family == "abs_grid" else f.params["k"]
        scale = (p.domain_size - 1) / denom
        rep.estimate *= scale
        rep.truth *= scale
    return rep


def _run_sparse(p, q, f, cfg):
    return sparse_protocol(p, q, f, cfg)


def _run_convex(p, q, f, cfg):
    return convex_lipschitz_protocol(p, q, f, cfg)


def _run_smooth(p, q, f, cfg):
    return smooth_protocol(p, q, f, cfg)


def _run_toeplitz(p, q, f, cfg):
    return toeplitz_protocol(p, q, f, cfg)


PROTOCOLS = {
    "sampling": _run_sampling,
    "debias": _run_debias,
    "svd": _run_svd,
    "spectral": _run_spectral,
    "hybrid": _run_hybrid,
    "eq": _run_eq,
    "sparse": _run_sparse,
    "gt": _run_gt,
    "abs": _run_abs,
    "convex": _run_convex,
    "smooth": _run_smooth,
    "toeplitz": _run_toeplitz,
}


def run_protocol(name: str, p: ProbVec, q: ProbVec, f: TargetFn | None,
                 cfg: ProtocolConfig) -> EstimateReport:
    try:
        runner = PROTOCOLS[name]
    except KeyError:
        raise InputValidationError(
            f"unknown protocol {name!r}; choose from {sorted(PROTOCOLS)}") from None
    return runner(p, q, f, cfg)
