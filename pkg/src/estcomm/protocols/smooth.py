"""Taylor-moment protocol for integrands smooth in y.

With r bounded y-derivatives, f(x, y) agrees with its degree-(r-1) Taylor
polynomial around the nearest anchor to within alpha^r / r!.  Alice ships
the p-averaged derivative moments at every anchor; Bob pairs them with
exact local moments of q, which costs only r/alpha numbers.  The leftover
residual is bounded well below 1, so it can be estimated by the debiasing
protocol at a rescaled, much looser accuracy.  Choosing
alpha = eps^(1/(r+1)) balances the two stages.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import ALICE, CostLedger, quantize_interval
from ..config import EstimateReport, ProtocolConfig
from ..dist import ProbVec
from ..errors import InputValidationError
from ..functions import TargetFn
from ..oracle import exact_expectation
from ..rng import derive_seed
from .debias import debiasing_protocol

__all__ = ["smooth_protocol"]


def _finite_difference_oracle(f: TargetFn, m: int, alpha: float):
    """Central-difference y-derivatives when no analytic oracle is given.

    Works only for entry callables that extend off the integer grid; the
    step alpha/100 keeps the difference error far below the stage-1
    quantization budget for functions with bounded higher derivatives.
    """
    h = alpha / 100.0

    def deriv(i: int, xv: float, yv: float) -> float:
        if i == 0:
            return f.entry_continuous(xv * m, yv * m)
        # centered stencil, shifted inward so every point stays on the domain
        base = min(max(yv - i * h / 2.0, 0.0), 1.0 - i * h)
        acc = 0.0
        for j in range(i + 1):
            acc += ((-1.0) ** (i - j) * math.comb(i, j)
                    * f.entry_continuous(xv * m, (base + j * h) * m))
        return acc / h ** i

    try:
        deriv(0, 0.0, 0.5 + h / 3.0)
    except (TypeError, IndexError) as exc:
        raise InputValidationError(
            "smooth protocol needs a derivative oracle; entries are not "
            "continuously evaluable") from exc
    return deriv


def smooth_protocol(p: ProbVec, q: ProbVec, f: TargetFn,
                    cfg: ProtocolConfig) -> EstimateReport:
    """Estimate E f(x, y) using f's derivative oracle in y.

    Stage 1 is deterministic: Alice sends E_p[d^i f(x, anchor)] for every
    derivative order i < r and anchor j * alpha, quantized at eps * alpha / 4;
    Bob integrates them against his exact offset moments.  Stage 2 runs the
    debiasing protocol on the rescaled Taylor residual at budget eps / 2,
    skipped entirely when the residual bound alpha^r / r! is already below
    eps / 2.
    """
    p.require_domain(f.rows, "p")
    q.require_domain(f.cols, "q")
    order = int(f.params.get("order", 1))
    m = f.grid_m
    if m is None:
        raise InputValidationError("smooth protocol needs a grid resolution")
    eps = cfg.epsilon
    alpha = min(1.0, cfg.constant("smooth_alpha_c", 1.0) * eps ** (1.0 / (order + 1)))
    deriv = f.deriv if f.deriv is not None else _finite_difference_oracle(f, m, alpha)
    n_anchors = math.ceil(1.0 / alpha)
    anchors = np.arange(n_anchors) * alpha
    eta = eps * alpha / 4.0

    xv = p.support / m
    yv = q.support / m
    jq = np.minimum((yv / alpha).astype(np.int64), n_anchors - 1)
    offsets = np.clip(yv - anchors[jq], 0.0, None)

    # Alice's message: quantized derivative moments per (order, anchor).
    moment_bits = 0
    decoded = np.empty((order, n_anchors))
    for i in range(order):
        for j, a in enumerate(anchors):
            val = float(np.dot(p.probs, [deriv(i, x, a) for x in xv]))
            _, b, dec = quantize_interval(val, -2.0, 2.0, eta)
            moment_bits += b
            decoded[i, j] = dec

    # Bob pairs each moment with his exact offset moment of the same anchor.
    stage1 = 0.0
    for i in range(order):
        terms = decoded[i, jq] * offsets ** i / math.factorial(i)
        stage1 += float(np.dot(q.probs, terms))

    scale = alpha ** order / math.factorial(order)
    eps2 = (eps / 2.0) / scale
    ledger = CostLedger()
    ledger.send(ALICE, moment_bits, "moments")
    details = {
        "alpha": alpha,
        "order": order,
        "anchors": n_anchors,
        "residual_scale": scale,
        "stage2": eps2 < 1.0,
    }

    if eps2 >= 1.0:
        estimate = stage1
    else:
        jq_all = np.minimum((np.arange(f.cols) / m / alpha).astype(np.int64),
                            n_anchors - 1)
        off_all = np.clip(np.arange(f.cols) / m - anchors[jq_all], 0.0, None)

        def residual(x: int, y: int) -> float:
            a = anchors[jq_all[y]]
            taylor = sum(deriv(i, x / m, a) * off_all[y] ** i / math.factorial(i)
                         for i in range(order))
            return min(1.0, max(-1.0, (f.entry(x, y) - taylor) / scale))

        res_fn = TargetFn(f.rows, f.cols, "smooth_residual", residual)
        inner = debiasing_protocol(p, q, res_fn,
                                   cfg.with_(epsilon=eps2,
                                             seed=derive_seed(cfg.seed, 0x51)))
        ledger.extend(inner.ledger)
        estimate = stage1 + scale * inner.estimate
        details["stage2_epsilon"] = eps2
        details["debias"] = inner.details

    return EstimateReport(
        estimate=estimate,
        truth=exact_expectation(p, q, f),
        ledger=ledger,
        seed=cfg.seed,
        details=details,
    )
