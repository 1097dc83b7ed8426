"""Spectral and combinatorial hardness diagnostics.

The quantities here certify how hard a target function is for two-party
estimation: the cumulative reciprocal singular values (lam), an exact
closed-form inverse check for the path-distance matrix, and brute-force
product-distribution discrepancy on small matrices.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dist import ProbVec
from .errors import DiagnosticFailure, EnumerationCapError, InputValidationError
from .functions import TargetFn

__all__ = [
    "SpectralSummary",
    "svd_summary",
    "lambda_bound_check",
    "PathInverseReport",
    "path_distance_inverse_check",
    "DiscrepancyReport",
    "brute_force_discrepancy",
]

SVD_SIZE_CAP = 2048
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SpectralSummary:
    """Singular spectrum of a target matrix plus derived certificates.

    ``lam[t-1]`` is the sum of 1/sigma_i over the t largest singular
    values; larger values certify a cheaper spectral protocol.
    """

    singular_values: np.ndarray
    rank: int
    spectral_norm: float
    lam: np.ndarray
    frobenius: float

    def __post_init__(self):
        s = np.asarray(self.singular_values, dtype=np.float64)
        lam = np.asarray(self.lam, dtype=np.float64)
        object.__setattr__(self, "singular_values", s)
        object.__setattr__(self, "lam", lam)
        if np.any(s <= 0.0):
            raise DiagnosticFailure("singular values must be strictly positive")
        if np.any(np.diff(s) > 1e-12 * max(self.spectral_norm, 1.0)):
            raise DiagnosticFailure("singular values must be nonincreasing")
        if lam.shape != s.shape or (lam.size and np.any(np.diff(lam) < 0.0)):
            raise DiagnosticFailure("lam must be nondecreasing, one entry per value")


def svd_summary(f: TargetFn, size_cap: int = SVD_SIZE_CAP) -> SpectralSummary:
    """Full-spectrum summary with a reconstruction sanity check."""
    n = max(f.rows, f.cols)
    if n > size_cap:
        raise EnumerationCapError(f"matrix side {n} above the {size_cap} cap")
    a = f.dense()
    u, s, vt = f.svd()
    resid = float(np.abs((u * s) @ vt - a).max())
    if resid > 1e-8 * n:
        raise DiagnosticFailure(f"SVD reconstruction residual {resid:.3g} too large")
    top = float(s[0]) if s.size else 0.0
    rank = int(np.sum(s > _RANK_RTOL * top)) if top > 0.0 else 0
    sv = s[:rank].copy()
    return SpectralSummary(
        singular_values=sv,
        rank=rank,
        spectral_norm=top if rank else 0.0,
        lam=np.cumsum(1.0 / sv) if rank else np.array([]),
        frobenius=float(np.linalg.norm(a)),
    )


def lambda_bound_check(summary: SpectralSummary, k: int) -> np.ndarray:
    """Margins lam_t - t^(3/2)/k for a k x k matrix bounded in [-1, 1].

    The floor holds because the t largest values sum to at most
    sqrt(t) * frobenius <= sqrt(t) * k, and the reciprocal sum is at least
    t^2 over that.  A negative margin beyond 1e-9 signals a numerical or
    construction bug.
    """
    t = np.arange(1, summary.rank + 1, dtype=np.float64)
    margins = summary.lam - t ** 1.5 / k
    bad = np.nonzero(margins < -1e-9)[0]
    if bad.size:
        worst = int(bad[0]) + 1
        raise DiagnosticFailure(
            f"reciprocal-sum floor violated at t={worst}: "
            f"lam={summary.lam[worst - 1]:.12g} < {worst ** 1.5 / k:.12g}")
    return margins


@dataclass(frozen=True)
class PathInverseReport:
    residual: float
    lambda_k: float
    bound: float


def path_distance_inverse_check(k: int) -> PathInverseReport:
    """Verify the closed-form inverse of the path-distance matrix.

    E_k[i, j] = |i - j| inverts as -(1/2) * Laplacian(path) plus a rank-one
    endpoint correction.  Returns the max-norm residual of E_k times that
    inverse against the identity, and checks that the full reciprocal sum
    of E_k / k stays below sqrt(3/2) * k^2.
    """
    if k < 2:
        raise InputValidationError("need k >= 2")
    idx = np.arange(k)
    e_mat = np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
    lap = 2.0 * np.eye(k)
    lap[0, 0] = lap[-1, -1] = 1.0
    lap[idx[:-1], idx[1:]] = -1.0
    lap[idx[1:], idx[:-1]] = -1.0
    v = np.zeros(k)
    v[0] = v[-1] = 1.0
    inv = -0.5 * lap + np.outer(v, v) / (2.0 * (k - 1))
    residual = float(np.abs(e_mat @ inv - np.eye(k)).max())

    s = np.linalg.svd(e_mat / k, compute_uv=False)
    lambda_k = float(np.sum(1.0 / s))
    bound = np.sqrt(1.5) * k * k
    if lambda_k > bound + 1e-6:
        raise DiagnosticFailure(
            f"reciprocal sum {lambda_k:.6g} exceeds the {bound:.6g} bound")
    return PathInverseReport(residual=residual, lambda_k=lambda_k, bound=float(bound))


@dataclass(frozen=True)
class DiscrepancyReport:
    """Largest |E[f * 1_R]| over rectangles under a product distribution."""

    value: float
    witness_rows: tuple[int, ...]
    witness_cols: tuple[int, ...]
    theta_rows: ProbVec
    theta_cols: ProbVec


ROWS_CAP = 24
_EXHAUSTIVE_ROWS = 16


def _side_value(col_sums: np.ndarray) -> tuple[float, int]:
    """Best single-side column choice: (value, +1 for positive side)."""
    pos = float(col_sums[col_sums > 0.0].sum())
    neg = float(-col_sums[col_sums < 0.0].sum())
    return (pos, 1) if pos >= neg else (neg, -1)


def brute_force_discrepancy(f: TargetFn, theta_rows: ProbVec,
                            theta_cols: ProbVec | None = None) -> DiscrepancyReport:
    """Exact rectangle maximization via the column-side reduction.

    For a fixed row subset S the optimal column set is the positive (or
    negative) part of c_y = sum over x in S of the theta-weighted entries,
    so only row subsets are enumerated.  Row counts up to 16 recompute
    every subset sum from scratch; beyond that a toggling walk is used and
    the winner is recomputed fresh before reporting.
    """
    if theta_cols is None:
        theta_cols = theta_rows
    theta_rows.require_domain(f.rows, "theta_rows")
    theta_cols.require_domain(f.cols, "theta_cols")
    if f.rows > ROWS_CAP:
        raise EnumerationCapError(f"{f.rows} rows exceed the enumeration cap {ROWS_CAP}")
    weighted = theta_rows.dense()[:, None] * theta_cols.dense()[None, :] * f.dense()

    best_value = 0.0
    best_mask = 0
    if f.rows <= _EXHAUSTIVE_ROWS:
        for mask in range(1, 1 << f.rows):
            rows = [x for x in range(f.rows) if mask >> x & 1]
            value, _ = _side_value(weighted[rows].sum(axis=0))
            if value > best_value:
                best_value, best_mask = value, mask
    else:
        col_sums = np.zeros(f.cols)
        mask = 0
        for i in range(1, 1 << f.rows):
            bit = (i & -i).bit_length() - 1
            mask ^= 1 << bit
            if mask >> bit & 1:
                col_sums += weighted[bit]
            else:
                col_sums -= weighted[bit]
            value, _ = _side_value(col_sums)
            if value > best_value:
                best_value, best_mask = value, mask

    rows = [x for x in range(f.rows) if best_mask >> x & 1]
    col_sums = weighted[rows].sum(axis=0)
    value, side = _side_value(col_sums)
    cols = np.nonzero(col_sums > 0.0 if side > 0 else col_sums < 0.0)[0]
    return DiscrepancyReport(
        value=value,
        witness_rows=tuple(rows),
        witness_cols=tuple(int(y) for y in cols),
        theta_rows=theta_rows,
        theta_cols=theta_cols,
    )
