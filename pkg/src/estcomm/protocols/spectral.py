"""Spectral-norm-driven protocols: heavy elements plus a light-part sketch.

Write sigma for the spectral norm of the remainder being sketched.  With
beta = (eps / sigma)^(2/3), entries of p (resp. q) with mass >= beta are
"heavy"; there are at most 1/beta of them and both parties exchange them
explicitly, which pins down every term touching a heavy coordinate to
within eps/2.  What remains is the light x light bilinear form.  In the
singular basis it is an inner product of coefficient vectors

    a_j = sqrt(sigma_j) (p_light . u_j),   b_j = sqrt(sigma_j) (v_j . q_light)

whose norms are at most sqrt(sigma beta) because |p_light|_2^2 <= beta.
The shared-randomness inner-product sketch at relative error
eps / (2 sigma beta) therefore lands within eps/2, and the total
communication scales like (sigma / eps)^(2/3) up to logs.

The hybrid variant first exchanges the top-t singular projections exactly
(rounded to ~eps / (t sigma_1)) and sketches only the tail, trading t
rounded reals against the tail's smaller spectral norm; t = 0 recovers the
plain protocol and t = rank is fully deterministic.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import ALICE, BOB, CostLedger, index_bits, quantize, quantize_interval
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..errors import InputValidationError
from ..functions import TargetFn
from ..oracle import exact_expectation
from ..rng import stream
from .common import run_amplified
from .sketch import real_ip_sketch, sketch_width

__all__ = ["SpectralPlan", "spectral_protocol", "spectral_hybrid_protocol"]

BASE_DELTA = 0.2
_RANK_RTOL = 1e-12


class SpectralPlan:
    """Resolved thresholds for one spectral run."""

    def __init__(self, cfg: ProtocolConfig, f: TargetFn, t: int):
        u, s, vt = f.svd()
        self.u, self.s, self.vt = u, s, vt
        self.rank = int(np.sum(s > _RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
        self.t = min(int(t), self.rank)
        self.sigma_top = float(s[0]) if self.rank else 0.0
        self.sigma_rest = float(s[self.t]) if self.t < self.rank else 0.0
        c = cfg.constant("spectral_beta_c", 1.0)
        if self.sigma_rest > 0.0:
            self.beta = min(1.0, c * (cfg.epsilon / self.sigma_rest) ** (2.0 / 3.0))
            self.sketch_delta = min(1.0, cfg.epsilon / (2.0 * self.sigma_rest * self.beta))
            self.sketch_k = sketch_width(self.sketch_delta, cfg)
        else:
            self.beta = 1.0
            self.sketch_delta = None
            self.sketch_k = 0


def spectral_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                      cfg: ProtocolConfig) -> EstimateReport:
    return _run(p, q, f, cfg, t=0)


def spectral_hybrid_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                             cfg: ProtocolConfig, t: int) -> EstimateReport:
    if t < 0:
        raise InputValidationError("t must be >= 0")
    return _run(p, q, f, cfg, t=t)


def _run(p: ProbVec, q: ProbVec, f: TargetFn, cfg: ProtocolConfig,
         t: int) -> EstimateReport:
    p.require_domain(f.rows, "p")
    q.require_domain(f.cols, "q")
    plan = SpectralPlan(cfg, f, t)
    deterministic = plan.sketch_k == 0

    def core(rng: np.random.Generator, ledger: CostLedger) -> float:
        return _one_run(p, q, f, cfg, plan, rng, ledger)

    if deterministic:
        ledger = CostLedger()
        estimate = _one_run(p, q, f, cfg, plan, stream(cfg.seed, 0), ledger)
        reps = 1
    else:
        estimate, ledger, reps = run_amplified(cfg, BASE_DELTA, core)
    truth = exact_expectation(p, q, f)
    return EstimateReport(estimate, truth, ledger, cfg.seed,
                          details={"beta": plan.beta, "t": plan.t,
                                   "rank": plan.rank,
                                   "sigma_rest": plan.sigma_rest,
                                   "sketch_k": plan.sketch_k, "reps": reps,
                                   "deterministic": deterministic})


def _heavy_split(v: ProbVec, beta: float) -> tuple[np.ndarray, np.ndarray]:
    heavy = v.probs >= beta
    return v.support[heavy], v.probs[heavy]


def _one_run(p: ProbVec, q: ProbVec, f: TargetFn, cfg: ProtocolConfig,
             plan: SpectralPlan, rng: np.random.Generator,
             ledger: CostLedger) -> float:
    eps = cfg.epsilon
    a_mat = f.dense()
    n_row, n_col = index_bits(f.rows), index_bits(f.cols)
    eta_h = eps * plan.beta / 4.0
    eta_top = eps / (4.0 * max(plan.t, 1) * max(plan.sigma_top, eps)) if plan.t else None

    hp_idx, hp_val = _heavy_split(p, plan.beta)
    hq_idx, hq_val = _heavy_split(q, plan.beta)
    assert len(hp_idx) <= 1.0 / plan.beta + 1e-9 and len(hq_idx) <= 1.0 / plan.beta + 1e-9

    p_light = p.dense().copy()
    p_light[hp_idx] = 0.0
    q_light = q.dense().copy()
    q_light[hq_idx] = 0.0

    # Round 1 (Bob): his heavy entries and his top-t projections.
    hq_dec = np.empty(len(hq_idx))
    prob_bits = None
    for i, v in enumerate(hq_val):
        _, prob_bits, hq_dec[i] = quantize_interval(v, 0.0, 1.0, eta_h)
    ledger.send(BOB, len(hq_idx) * (n_col + (prob_bits or 0)), "heavy")
    b_top = np.array([float(plan.vt[j] @ q_light) for j in range(plan.t)])
    for v in b_top:
        _, bits, _ = quantize(v, eta_top)
        ledger.send(BOB, bits, "projection")

    # Round 2 (Alice): her heavy entries, projections, sketch, cross term.
    hp_dec = np.empty(len(hp_idx))
    for i, v in enumerate(hp_val):
        _, prob_bits, hp_dec[i] = quantize_interval(v, 0.0, 1.0, eta_h)
    ledger.send(ALICE, len(hp_idx) * (n_row + (prob_bits or 0)), "heavy")
    a_top_dec = np.empty(plan.t)
    for j in range(plan.t):
        _, bits, a_top_dec[j] = quantize(float(p_light @ plan.u[:, j]), eta_top)
        ledger.send(ALICE, bits, "projection")

    sketch_val = 0.0
    if plan.sketch_k:
        js = slice(plan.t, plan.rank)
        w = np.sqrt(plan.s[js])
        a_vec = w * (p_light @ plan.u[:, js])
        b_vec = w * (plan.vt[js] @ q_light)
        sketch_val, _ = real_ip_sketch(a_vec, b_vec, plan.sketch_delta, cfg, rng,
                                       ledger)

    # Cross term (p_light)^T A q_heavy~, computed by Alice from Bob's rounding.
    cross = 0.0
    if len(hq_idx):
        cross = float(p_light @ a_mat[:, hq_idx] @ hq_dec)
    _, cross_bits, cross_dec = quantize_interval(cross, -2.0, 2.0, eps / 16.0)
    ledger.send(ALICE, cross_bits, "cross")

    # Bob assembles: heavy rows against his exact q, Alice's cross term,
    # the exact top-t part, and the sketched tail.
    heavy_rows = float(hp_dec @ a_mat[hp_idx] @ q.dense()) if len(hp_idx) else 0.0
    top = float(np.sum(plan.s[:plan.t] * a_top_dec * b_top))
    estimate = heavy_rows + cross_dec + top + sketch_val

    # Construction-time budget checks (not statistical).
    heavy_bound = (eta_h / 2.0) * (len(hp_idx) + len(hq_idx)) + eps / 32.0
    assert heavy_bound <= eps / 2.0 + 1e-12
    if plan.sketch_k:
        assert plan.sketch_delta * plan.sigma_rest * plan.beta <= eps / 2.0 + 1e-12
    return estimate
