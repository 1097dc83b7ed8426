"""One-way sketch for real inner products under shared randomness.

Both parties see k = ceil(100 / delta^2) shared sign vectors u_i.  Alice
ships her correlations a . u_i (suitably rounded) and Bob averages
(a . u_i)(b . u_i), whose mean is exactly <a, b> and whose variance is at
most 3 |a|^2 |b|^2 per term; Chebyshev then gives error at most
delta |a|_2 |b|_2 with failure probability 3/100.

Alice also ships |a|_2 in a 7-bit-exponent floating format so the rounding
of each correlation can be relative to the true norm; the whole rounding
contribution stays below (delta/4) |a|_2 |b|_2.
"""

from __future__ import annotations

import math

import numpy as np

from ..comm import ALICE, CostLedger, quantize_interval
from ..config import ProtocolConfig
from ..errors import InputValidationError

__all__ = ["real_ip_sketch", "sketch_width"]

_EXP_BITS = 7
_EXP_LO = -63


def sketch_width(delta: float, cfg: ProtocolConfig | None = None) -> int:
    c = cfg.constant("sketch_c", 100.0) if cfg is not None else 100.0
    return int(math.ceil(c / delta ** 2))


def _send_norm(norm: float, delta: float, ledger: CostLedger) -> float:
    """Ship |a|_2 with relative error <= delta/16; 0 gets a 1-bit flag."""
    if norm == 0.0:
        ledger.send(ALICE, 1, "norm")
        return 0.0
    e = int(np.clip(math.floor(math.log2(norm)), _EXP_LO, _EXP_LO + 2 ** _EXP_BITS - 1))
    mant = norm / 2.0 ** e  # in [1, 2)
    _, bits, dec = quantize_interval(mant, 1.0, 2.0, delta / 16.0)
    ledger.send(ALICE, 1 + _EXP_BITS + bits, "norm")
    return dec * 2.0 ** e


def real_ip_sketch(a: np.ndarray, b: np.ndarray, delta: float,
                   cfg: ProtocolConfig, rng: np.random.Generator,
                   ledger: CostLedger | None = None) -> tuple[float, CostLedger]:
    """Estimate <a, b>; error at most delta |a|_2 |b|_2 w.p. >= 0.9."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise InputValidationError("sketch needs two aligned 1-d vectors")
    if not 0.0 < delta <= 1.0:
        raise InputValidationError("delta must lie in (0, 1]")
    if ledger is None:
        ledger = CostLedger()
    n = a.size
    k = sketch_width(delta, cfg)

    norm_a = float(np.linalg.norm(a))
    norm_dec = _send_norm(norm_a, delta, ledger)
    if norm_a == 0.0:
        return 0.0, ledger

    # |a . u| <= |a|_1 <= sqrt(n) |a|_2; a slightly padded window absorbs
    # the norm's own rounding.
    window = norm_dec * math.sqrt(n) * 1.25
    eta = delta * norm_dec / (4.0 * math.sqrt(n))
    comp_bits = None
    total = 0.0
    chunk = max(1, min(k, (1 << 21) // max(n, 1)))
    done = 0
    while done < k:
        c = min(chunk, k - done)
        u = rng.integers(0, 2, size=(c, n)).astype(np.float64) * 2.0 - 1.0
        sa = u @ a
        sb = u @ b
        for i in range(c):
            _, comp_bits, dec = quantize_interval(float(sa[i]), -window, window, eta)
            total += dec * sb[i]
        done += c
    ledger.send(ALICE, k * comp_bits, "sketch")
    return total / k, ledger
