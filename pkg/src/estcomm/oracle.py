"""Exact ground-truth computations used for truth columns and debugging.

These run outside the communication model: they see both distributions at
once and never touch a ledger.
"""

from __future__ import annotations

import numpy as np

from .dist import ProbVec, SignedVec
from .errors import DimensionMismatchError
from .functions import TargetFn

__all__ = [
    "exact_expectation",
    "exact_bilinear",
    "row_conditional_mean",
    "col_conditional_mean",
]


def _check_domains(p_size: int, q_size: int, f: TargetFn) -> None:
    if p_size != f.rows or q_size != f.cols:
        raise DimensionMismatchError(
            f"distributions on {p_size}/{q_size} points but f is {f.rows} x {f.cols}"
        )


def _threshold(p: ProbVec, q: ProbVec, shift: int = 0) -> float:
    """P[x - y >= shift] for independent x ~ p, y ~ q."""
    return float(np.dot(p.probs, q.cdf_at(p.support - shift)))


def _mean_abs_gap(p: ProbVec, q: ProbVec) -> float:
    """E|x - y| via the layer-cake identity over CDFs."""
    n = p.domain_size
    if n <= 1:
        return 0.0
    levels = np.arange(n - 1)
    fp = p.cdf_at(levels)
    fq = q.cdf_at(levels)
    return float(np.sum(fp + fq - 2.0 * fp * fq))


def _structured_expectation(p: ProbVec, q: ProbVec, f: TargetFn) -> float | None:
    """Closed forms for families whose dense matrix may be refused."""
    if f.family == "eq":
        _, ip, iq = np.intersect1d(p.support, q.support,
                                   assume_unique=True, return_indices=True)
        return float(np.dot(p.probs[ip], q.probs[iq]))
    if f.family == "gt":
        return _threshold(p, q)
    if f.family in ("abs_grid", "distance"):
        denom = f.params["m"] if f.family == "abs_grid" else f.params["k"]
        return _mean_abs_gap(p, q) / denom
    if f.family == "toeplitz":
        total = f.params["base"]
        for d, c in f.params["changes"]:
            total += c * _threshold(p, q, d)
        return float(total)
    return None


def exact_expectation(p: ProbVec, q: ProbVec, f: TargetFn) -> float:
    """E_{x~p, y~q}[f(x, y)], exactly (up to float64 arithmetic)."""
    _check_domains(p.domain_size, q.domain_size, f)
    if not f.has_dense():
        structured = _structured_expectation(p, q, f)
        if structured is not None:
            return structured
    if f.has_dense() and not (p.is_sparse and q.is_sparse):
        a = f.dense()
        return float(p.dense() @ a @ q.dense())
    if f.has_dense():
        sub = f.dense()[np.ix_(p.support, q.support)]
        return float(p.probs @ sub @ q.probs)
    total = 0.0
    for xi, px in zip(p.support, p.probs):
        row = f.block(np.full(q.nnz, xi), q.support)
        total += px * float(row @ q.probs)
    return total


def exact_bilinear(pt: SignedVec, qt: SignedVec, f: TargetFn) -> float:
    """The bilinear form p~^T A q~ for signed vectors."""
    _check_domains(pt.domain_size, qt.domain_size, f)
    if f.has_dense():
        sub = f.dense()[np.ix_(pt.support, qt.support)]
        return float(pt.values @ sub @ qt.values)
    total = 0.0
    for xi, vx in zip(pt.support, pt.values):
        row = f.block(np.full(qt.nnz, xi), qt.support)
        total += vx * float(row @ qt.values)
    return total


def row_conditional_mean(f: TargetFn, q: ProbVec, x: int) -> float:
    """E_{y~q}[f(x, y)] for a fixed row x."""
    if q.domain_size != f.cols:
        raise DimensionMismatchError("q does not match f's column domain")
    vals = f.block(np.full(q.nnz, x), q.support)
    return float(vals @ q.probs)


def col_conditional_mean(f: TargetFn, p: ProbVec, y: int) -> float:
    """E_{x~p}[f(x, y)] for a fixed column y."""
    if p.domain_size != f.rows:
        raise DimensionMismatchError("p does not match f's row domain")
    vals = f.block(p.support, np.full(p.nnz, y))
    return float(vals @ p.probs)
