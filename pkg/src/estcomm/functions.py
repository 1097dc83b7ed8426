"""Target functions f(x, y) on product domains, as named families.

A :class:`TargetFn` is a bounded function ``f: {0..rows-1} x {0..cols-1}
-> [-1, 1]`` known to both parties.  Families are built by
:func:`build_family`; each carries enough structure for the protocols that
consume it (dense matrix and cached SVD for the spectral route, derivative
callbacks for the Taylor route, diagonal structure for the Toeplitz
reduction).

Family tags:

* ``eq``        indicator of x == y (identity matrix); size 2**n or explicit k
* ``gt``        indicator of x >= y (lower-triangular ones)
* ``ip``        (-1)**<x, y> over bit strings, n bits per side
* ``abs_grid``  |x - y| / m on the (m+1)-point grid {0, 1/m, ..., 1}
* ``smooth_grid``  grid samples of a y-smooth function with derivative oracle
* ``convex_grid``  grid samples of a function convex and 1-Lipschitz in y
* ``toeplitz``  banded piecewise-constant diagonals a_{x-y}
* ``hadamard``  Sylvester +-1 matrix, size a power of two
* ``distance``  |i - j| / k on k points
* ``double_index``  ((i,x),(j,y)) -> x_j * y_i with L = 2**k index bits
* ``random_boolean``  seeded iid 0/1 entries
* ``dense_custom``  any explicit matrix with entries in [-1, 1]
"""

from __future__ import annotations

import math
import threading
from typing import Callable, Sequence

import numpy as np

from .errors import InputValidationError
from .rng import stream

__all__ = ["TargetFn", "build_family", "FAMILIES", "sylvester_hadamard"]

DENSE_CAP = 1 << 23  # refuse to materialize matrices bigger than this


def sylvester_hadamard(k: int) -> np.ndarray:
    """The k x k +-1 Sylvester matrix; k must be a power of two."""
    if k < 1 or k & (k - 1):
        raise InputValidationError(f"hadamard size must be a power of two, got {k}")
    h = np.array([[1.0]])
    while h.shape[0] < k:
        h = np.block([[h, h], [h, -h]])
    return h


class TargetFn:
    """A bounded two-party target function with optional extra structure."""

    def __init__(
        self,
        rows: int,
        cols: int,
        family: str,
        entry: Callable[[int, int], float],
        params: dict | None = None,
        matrix: np.ndarray | None = None,
        deriv: Callable[[int, float, float], float] | None = None,
    ):
        if rows < 1 or cols < 1:
            raise InputValidationError("domain sizes must be >= 1")
        self.rows = int(rows)
        self.cols = int(cols)
        self.family = family
        self.params = dict(params or {})
        self._entry = entry
        self._matrix = matrix
        self.deriv = deriv
        self._svd: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None
        self._lock = threading.Lock()
        if matrix is not None:
            if matrix.shape != (rows, cols):
                raise InputValidationError("matrix shape disagrees with domain sizes")
            if np.abs(matrix).max(initial=0.0) > 1.0 + 1e-12:
                raise InputValidationError("entries must lie in [-1, 1]")

    def entry(self, x: int, y: int) -> float:
        if not (0 <= x < self.rows and 0 <= y < self.cols):
            raise InputValidationError(f"({x}, {y}) outside {self.rows} x {self.cols}")
        if self._matrix is not None:
            return float(self._matrix[x, y])
        return float(self._entry(int(x), int(y)))

    def entry_continuous(self, x: float, y: float) -> float:
        """The defining callable at possibly fractional coordinates.

        Bypasses the cached matrix; only meaningful for families whose
        formula extends off the integer grid.
        """
        return float(self._entry(x, y))

    def block(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        """Evaluate at aligned index arrays."""
        xs = np.asarray(xs, dtype=np.int64)
        ys = np.asarray(ys, dtype=np.int64)
        if self._matrix is None and self.rows * self.cols <= DENSE_CAP and xs.size > 64:
            self.dense()
        if self._matrix is not None:
            return self._matrix[xs, ys].astype(np.float64)
        return np.array([self._entry(int(a), int(b)) for a, b in zip(xs, ys)])

    def has_dense(self) -> bool:
        return self._matrix is not None or self.rows * self.cols <= DENSE_CAP

    def dense(self) -> np.ndarray:
        """The full matrix; built lazily, refused above DENSE_CAP entries."""
        if self._matrix is None:
            if self.rows * self.cols > DENSE_CAP:
                raise InputValidationError(
                    f"dense matrix would need {self.rows * self.cols} entries (cap {DENSE_CAP})"
                )
            with self._lock:
                if self._matrix is None:
                    xs, ys = np.meshgrid(np.arange(self.rows), np.arange(self.cols),
                                         indexing="ij")
                    flat = np.array([self._entry(int(a), int(b))
                                     for a, b in zip(xs.ravel(), ys.ravel())])
                    self._matrix = flat.reshape(self.rows, self.cols)
        return self._matrix

    def svd(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cached full SVD (U, s, Vt) of the dense matrix."""
        if self._svd is None:
            with self._lock:
                if self._svd is None:
                    u, s, vt = np.linalg.svd(self.dense(), full_matrices=False)
                    self._svd = (u, s, vt)
        return self._svd

    @property
    def grid_m(self) -> int | None:
        """Grid resolution for families living on {0, 1/m, ..., 1}."""
        return self.params.get("m")

    def __repr__(self) -> str:
        return f"TargetFn({self.family}, {self.rows}x{self.cols})"


# -- family constructors ---------------------------------------------------


def _size_from(n: int | None, k: int | None, what: str) -> int:
    if (n is None) == (k is None):
        raise InputValidationError(f"{what}: give exactly one of n (bits) or k (size)")
    if n is not None:
        if n < 0 or n > 24:
            raise InputValidationError(f"{what}: n must be in [0, 24]")
        return 1 << n
    if k < 1:
        raise InputValidationError(f"{what}: k must be >= 1")
    return int(k)


def _eq(n: int | None = None, k: int | None = None) -> TargetFn:
    size = _size_from(n, k, "eq")
    return TargetFn(size, size, "eq", lambda x, y: 1.0 if x == y else 0.0,
                    params={"n": n, "k": size},
                    matrix=np.eye(size) if size * size <= DENSE_CAP else None)


def _gt(n: int | None = None, k: int | None = None) -> TargetFn:
    size = _size_from(n, k, "gt")
    mat = None
    if size * size <= DENSE_CAP:
        mat = (np.arange(size)[:, None] >= np.arange(size)[None, :]).astype(np.float64)
    return TargetFn(size, size, "gt", lambda x, y: 1.0 if x >= y else 0.0,
                    params={"n": n, "k": size}, matrix=mat)


def _ip(n: int) -> TargetFn:
    if not 0 <= n <= 12:
        raise InputValidationError("ip: n must be in [0, 12]")
    size = 1 << n
    mat = sylvester_hadamard(size)  # (-1)**<x,y> over GF(2) is the Sylvester matrix

    def entry(x: int, y: int) -> float:
        return -1.0 if bin(x & y).count("1") % 2 else 1.0

    return TargetFn(size, size, "ip", entry, params={"n": n}, matrix=mat)


def _abs_grid(m: int) -> TargetFn:
    if m < 1:
        raise InputValidationError("abs_grid: m must be >= 1")
    size = m + 1
    mat = None
    if size * size <= DENSE_CAP:
        idx = np.arange(size)
        mat = np.abs(idx[:, None] - idx[None, :]) / m
    return TargetFn(size, size, "abs_grid", lambda x, y: abs(x - y) / m,
                    params={"m": m}, matrix=mat)


def _distance(k: int) -> TargetFn:
    if k < 1:
        raise InputValidationError("distance: k must be >= 1")
    idx = np.arange(k)
    mat = np.abs(idx[:, None] - idx[None, :]) / k
    return TargetFn(k, k, "distance", lambda x, y: abs(x - y) / k, params={"k": k},
                    matrix=mat if k * k <= DENSE_CAP else None)


def _hadamard(k: int) -> TargetFn:
    mat = sylvester_hadamard(k)
    return TargetFn(k, k, "hadamard", lambda x, y: float(mat[x, y]), params={"k": k},
                    matrix=mat)


def _toeplitz(size: int, base: float = 0.0,
              changes: Sequence[tuple[int, float]] = ()) -> TargetFn:
    """Diagonal-indexed step function: a_d = base + sum of jumps at d_i <= d.

    ``d = x - y`` ranges over [-(size-1), size-1].  Jump magnitudes are
    limited to 2 so each recombination coefficient stays a valid weight.
    """
    if size < 1:
        raise InputValidationError("toeplitz: size must be >= 1")
    changes = sorted((int(d), float(c)) for d, c in changes)
    for d, c in changes:
        if not -(size - 1) <= d <= size - 1:
            raise InputValidationError(f"toeplitz: change position {d} out of diagonal range")
        if abs(c) > 2.0:
            raise InputValidationError("toeplitz: jump magnitude must be <= 2")
    diag = np.full(2 * size - 1, float(base))
    for d, c in changes:
        diag[d + size - 1:] += c
    if np.abs(diag).max() > 1.0 + 1e-12:
        raise InputValidationError("toeplitz: diagonal values must stay in [-1, 1]")
    mat = None
    if size * size <= DENSE_CAP:
        idx = np.arange(size)
        mat = diag[(idx[:, None] - idx[None, :]) + size - 1]
    return TargetFn(size, size, "toeplitz",
                    lambda x, y: float(diag[x - y + size - 1]),
                    params={"size": size, "base": float(base), "changes": changes},
                    matrix=mat)


def _double_index(k: int) -> TargetFn:
    """Paired-index family: inputs (i, x) with i in [L], x in {0,1}^L, L = 2**k.

    The value is the product of the sign of Alice's bit at Bob's index and
    Bob's bit at Alice's index, so a constant-size exchange of (i, j) and
    the two referenced bits evaluates it exactly.
    """
    if not 1 <= k <= 4:
        raise InputValidationError("double_index: k must be in [1, 4]")
    L = 1 << k
    mask = (1 << L) - 1
    size = L << L

    def entry(xe: int, ye: int) -> float:
        i, xb = xe >> L, xe & mask
        j, yb = ye >> L, ye & mask
        sx = 1.0 - 2.0 * ((xb >> j) & 1)
        sy = 1.0 - 2.0 * ((yb >> i) & 1)
        return sx * sy

    return TargetFn(size, size, "double_index", entry, params={"k": k, "L": L})


def _random_boolean(n: int, seed: int = 0) -> TargetFn:
    if not 0 <= n <= 11:
        raise InputValidationError("random_boolean: n must be in [0, 11]")
    size = 1 << n
    mat = stream(seed, 0xB001).integers(0, 2, size=(size, size)).astype(np.float64)
    return TargetFn(size, size, "random_boolean", lambda x, y: float(mat[x, y]),
                    params={"n": n, "seed": seed}, matrix=mat)


def _dense_custom(matrix: np.ndarray, family: str = "dense_custom") -> TargetFn:
    mat = np.asarray(matrix, dtype=np.float64)
    if mat.ndim != 2:
        raise InputValidationError("dense_custom: need a 2-d matrix")
    return TargetFn(mat.shape[0], mat.shape[1], family,
                    lambda x, y: float(mat[x, y]), matrix=mat)


# Derivative tables for the smooth grid kinds.  Each maps
# (order i, x value, y value) -> d^i/dy^i f(x, y); all derivatives up to
# any order used stay within [-1, 1].

def _smooth_poly(i: int, xv: float, yv: float) -> float:
    s = xv + yv
    if i == 0:
        return s * s / 8.0
    if i == 1:
        return s / 4.0
    if i == 2:
        return 0.25
    return 0.0


def _smooth_sin(i: int, xv: float, yv: float) -> float:
    return math.sin(xv + yv + i * math.pi / 2.0) / 4.0


def _smooth_sep(i: int, xv: float, yv: float) -> float:
    c = yv - 0.5
    u = xv * xv / 8.0
    if i == 0:
        return u * c ** 3
    if i == 1:
        return u * 3.0 * c ** 2
    if i == 2:
        return u * 6.0 * c
    if i == 3:
        return u * 6.0
    return 0.0


_SMOOTH_KINDS = {"poly": _smooth_poly, "sin": _smooth_sin, "sep_poly": _smooth_sep}


def _smooth_grid(m: int, order: int, kind: str = "sin",
                 deriv: Callable[[int, float, float], float] | None = None) -> TargetFn:
    """Grid samples of a function with ``order`` y-derivatives available.

    ``deriv(i, x, y)`` must return the i-th y-derivative for ``i < order``
    at grid coordinates in [0, 1]; the order-th derivative must be bounded
    by 1 in magnitude (it is never evaluated, only its bound is used).
    """
    if m < 1:
        raise InputValidationError("smooth_grid: m must be >= 1")
    if order < 1:
        raise InputValidationError("smooth_grid: order must be >= 1")
    if deriv is None:
        if kind not in _SMOOTH_KINDS:
            raise InputValidationError(f"smooth_grid: unknown kind {kind!r}")
        deriv = _SMOOTH_KINDS[kind]
    size = m + 1
    mat = None
    if size * size <= DENSE_CAP:
        xv = np.arange(size) / m
        mat = np.array([[deriv(0, a, b) for b in xv] for a in xv])
    return TargetFn(size, size, "smooth_grid",
                    lambda x, y: deriv(0, x / m, y / m),
                    params={"m": m, "order": order, "kind": kind if deriv in _SMOOTH_KINDS.values() else "custom"},
                    matrix=mat, deriv=deriv)


# Convex-in-y grid kinds: each slice f(x, .) is convex and 1-Lipschitz.

def _convex_grid(m: int, kind: str = "hinge") -> TargetFn:
    if m < 1:
        raise InputValidationError("convex_grid: m must be >= 1")
    size = m + 1
    y = np.arange(size) / m
    x = y[:, None]
    if kind == "hinge":
        mat = np.maximum(y[None, :] - x, 0.0)
    elif kind == "absdiff":
        mat = np.abs(y[None, :] - x)
    elif kind == "square":
        mat = np.broadcast_to((y - 0.5) ** 2, (size, size)).copy()
    else:
        raise InputValidationError(f"convex_grid: unknown kind {kind!r}")
    return TargetFn(size, size, "convex_grid", lambda a, b: float(mat[a, b]),
                    params={"m": m, "kind": kind}, matrix=mat)


FAMILIES: dict[str, Callable[..., TargetFn]] = {
    "eq": _eq,
    "gt": _gt,
    "ip": _ip,
    "abs_grid": _abs_grid,
    "smooth_grid": _smooth_grid,
    "convex_grid": _convex_grid,
    "toeplitz": _toeplitz,
    "hadamard": _hadamard,
    "distance": _distance,
    "double_index": _double_index,
    "random_boolean": _random_boolean,
    "dense_custom": _dense_custom,
}


def build_family(family: str, **params) -> TargetFn:
    """Construct a named family; see the module docstring for the catalog."""
    key = family.lower().replace("-", "_")
    if key == "identity":  # alias: identity matrix of explicit size
        key, params = "eq", {"k": params.get("k") or params.get("n")}
    if key not in FAMILIES:
        raise InputValidationError(f"unknown family {family!r}; known: {sorted(FAMILIES)}")
    return FAMILIES[key](**params)
