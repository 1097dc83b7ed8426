"""Probability vectors and signed measures over finite ordered domains.

The domain is always ``{0, ..., N-1}``.  :class:`ProbVec` is an immutable
distribution; construction validates non-negativity and unit mass to 1e-12.
Vectors with support on at most 10% of the domain are stored sparsely
(index/value arrays), denser ones as a full array; the representation is
invisible to callers except through ``is_sparse``.

:class:`SignedVec` is the relaxation used by sub-distributions (truncations)
and signed test vectors: finite values, no sign or mass constraint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatchError, InputValidationError

__all__ = ["ProbVec", "SignedVec", "DENSITY_SWITCH"]

DENSITY_SWITCH = 0.10  # sparse storage below this support/domain ratio
_MASS_TOL = 1e-12


class ProbVec:
    """An immutable probability distribution on ``{0, ..., N-1}``."""

    __slots__ = ("domain_size", "_support", "_probs", "_dense", "_cdf")

    def __init__(self, domain_size: int, support: np.ndarray, probs: np.ndarray):
        """Build from aligned index/probability arrays; prefer the factories.

        ``support`` must be strictly increasing, within range, with strictly
        positive masses summing to 1 within 1e-12.
        """
        if domain_size < 1:
            raise InputValidationError("domain_size must be >= 1")
        support = np.asarray(support, dtype=np.int64)
        probs = np.asarray(probs, dtype=np.float64)
        if support.shape != probs.shape or support.ndim != 1:
            raise InputValidationError("support and probs must be aligned 1-d arrays")
        if support.size:
            if support[0] < 0 or support[-1] >= domain_size:
                raise InputValidationError("support index out of range")
            if np.any(np.diff(support) <= 0):
                raise InputValidationError("support must be strictly increasing")
        if np.any(probs <= 0):
            raise InputValidationError("stored probabilities must be > 0")
        total = float(probs.sum())
        if abs(total - 1.0) > _MASS_TOL:
            raise InputValidationError(f"mass must be 1 within {_MASS_TOL}, got {total!r}")
        self.domain_size = int(domain_size)
        self._support = support
        self._probs = probs
        self._dense: np.ndarray | None = None
        self._cdf: np.ndarray | None = None

    # -- factories ---------------------------------------------------------

    @staticmethod
    def from_dense(values: Iterable[float]) -> "ProbVec":
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                         dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise InputValidationError("need a non-empty 1-d array")
        if np.any(arr < -1e-15):
            raise InputValidationError("negative probability")
        arr = np.where(arr < 0, 0.0, arr)
        (idx,) = np.nonzero(arr)
        return ProbVec(arr.size, idx, arr[idx])

    @staticmethod
    def from_mapping(domain_size: int, entries: Mapping[int, float]) -> "ProbVec":
        items = sorted((int(i), float(v)) for i, v in entries.items() if v != 0.0)
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.float64)
        if np.any(val < 0):
            raise InputValidationError("negative probability")
        return ProbVec(domain_size, idx, val)

    @staticmethod
    def delta(domain_size: int, atom: int) -> "ProbVec":
        if not 0 <= atom < domain_size:
            raise InputValidationError("atom out of range")
        return ProbVec(domain_size, np.array([atom]), np.array([1.0]))

    @staticmethod
    def uniform(domain_size: int) -> "ProbVec":
        return ProbVec.from_dense(np.full(domain_size, 1.0 / domain_size))

    # -- access ------------------------------------------------------------

    @property
    def support(self) -> np.ndarray:
        return self._support

    @property
    def probs(self) -> np.ndarray:
        return self._probs

    @property
    def nnz(self) -> int:
        return int(self._support.size)

    @property
    def is_sparse(self) -> bool:
        return self.nnz <= DENSITY_SWITCH * self.domain_size

    def p(self, i: int) -> float:
        pos = np.searchsorted(self._support, i)
        if pos < self.nnz and self._support[pos] == i:
            return float(self._probs[pos])
        return 0.0

    def dense(self) -> np.ndarray:
        if self._dense is None:
            d = np.zeros(self.domain_size)
            d[self._support] = self._probs
            self._dense = d
        return self._dense

    def mass_at(self, indices: np.ndarray) -> np.ndarray:
        """Vectorized lookup of probabilities at arbitrary indices."""
        pos = np.searchsorted(self._support, indices)
        pos = np.clip(pos, 0, max(self.nnz - 1, 0))
        out = np.zeros(len(indices))
        if self.nnz:
            hit = self._support[pos] == indices
            out[hit] = self._probs[pos[hit]]
        return out

    def cdf_at(self, indices: np.ndarray | int) -> np.ndarray:
        """P[X <= i] at each index; indices below the support give 0."""
        if self._cdf is None:
            self._cdf = np.cumsum(self._probs)
        pos = np.searchsorted(self._support, indices, side="right")
        return np.where(pos > 0, self._cdf[np.maximum(pos - 1, 0)], 0.0)

    # -- sampling ----------------------------------------------------------

    def sample(self, rng: np.random.Generator, k: int = 1) -> np.ndarray:
        """Draw ``k`` iid indices.  Deterministic given the generator state."""
        if k < 0:
            raise InputValidationError("k must be >= 0")
        if self._cdf is None:
            self._cdf = np.cumsum(self._probs)
        u = rng.random(k)
        pos = np.searchsorted(self._cdf, u, side="right")
        pos = np.minimum(pos, self.nnz - 1)
        return self._support[pos]

    # -- misc --------------------------------------------------------------

    def require_domain(self, domain_size: int, what: str = "distribution") -> None:
        if self.domain_size != domain_size:
            raise DimensionMismatchError(
                f"{what} lives on {{0..{self.domain_size - 1}}}, expected domain size {domain_size}"
            )

    def __repr__(self) -> str:
        kind = "sparse" if self.is_sparse else "dense"
        return f"ProbVec(N={self.domain_size}, nnz={self.nnz}, {kind})"


class SignedVec:
    """A finite signed measure on ``{0, ..., N-1}`` (sparse storage)."""

    __slots__ = ("domain_size", "_support", "_values")

    def __init__(self, domain_size: int, support: np.ndarray, values: np.ndarray):
        support = np.asarray(support, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if domain_size < 1:
            raise InputValidationError("domain_size must be >= 1")
        if support.shape != values.shape or support.ndim != 1:
            raise InputValidationError("support and values must be aligned 1-d arrays")
        if support.size:
            if support[0] < 0 or support[-1] >= domain_size:
                raise InputValidationError("support index out of range")
            if np.any(np.diff(support) <= 0):
                raise InputValidationError("support must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise InputValidationError("values must be finite")
        keep = values != 0.0
        self.domain_size = int(domain_size)
        self._support = support[keep]
        self._values = values[keep]

    @staticmethod
    def from_dense(values: Iterable[float]) -> "SignedVec":
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                         dtype=np.float64)
        (idx,) = np.nonzero(arr)
        return SignedVec(arr.size, idx, arr[idx])

    @staticmethod
    def from_mapping(domain_size: int, entries: Mapping[int, float]) -> "SignedVec":
        items = sorted((int(i), float(v)) for i, v in entries.items())
        idx = np.array([i for i, _ in items], dtype=np.int64)
        val = np.array([v for _, v in items], dtype=np.float64)
        return SignedVec(domain_size, idx, val)

    @staticmethod
    def from_prob(p: ProbVec) -> "SignedVec":
        return SignedVec(p.domain_size, p.support.copy(), p.probs.copy())

    @property
    def support(self) -> np.ndarray:
        return self._support

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def nnz(self) -> int:
        return int(self._support.size)

    def l1_norm(self) -> float:
        return float(np.abs(self._values).sum())

    def dense(self) -> np.ndarray:
        d = np.zeros(self.domain_size)
        d[self._support] = self._values
        return d

    def split(self) -> tuple["SignedVec", "SignedVec"]:
        """Return (positive part, negative part); both are non-negative."""
        pos = np.maximum(self._values, 0.0)
        neg = np.maximum(-self._values, 0.0)
        return (SignedVec(self.domain_size, self._support.copy(), pos),
                SignedVec(self.domain_size, self._support.copy(), neg))

    def normalized(self) -> tuple[float, ProbVec | None]:
        """Return (l1 mass, direction as a ProbVec), or (0.0, None) if zero."""
        mass = self.l1_norm()
        if mass == 0.0:
            return 0.0, None
        if np.any(self._values < 0):
            raise InputValidationError("normalized() needs a non-negative vector; split() first")
        return mass, ProbVec(self.domain_size, self._support.copy(), self._values / mass)

    def __repr__(self) -> str:
        return f"SignedVec(N={self.domain_size}, nnz={self.nnz}, |.|_1={self.l1_norm():.4g})"
