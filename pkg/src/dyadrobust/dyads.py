"""Canonical dyad indexing and the dataset container shared by all estimators.

A dyad is an unordered pair of units ``{i, j}``.  Units carry dense 0-based
integer ids; the canonical key orders the pair as ``i < j``, so the two
directions of a pair map to the same key.  Canonical keys are enumerated
lexicographically, giving a fixed bijection between keys and dense dyad
indices ``0 .. N*(N-1)/2 - 1``.

Two dyads are *adjacent* when they share a member unit.  Adjacency is what
ties the clustering structure together: the errors of any two adjacent dyads
may be correlated, so the variance estimators in :mod:`dyadrobust.variance`
sum score cross-products over adjacent pairs rather than within disjoint
groups.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DataError

__all__ = [
    "DyadKey",
    "dyad_index",
    "dyad_members",
    "shares_member",
    "unit_cluster",
    "DyadDataset",
]


class DyadKey(NamedTuple):
    """Canonical identity of an unordered unit pair, ordered ``i < j``."""

    i: int
    j: int

    @classmethod
    def canonical(cls, a: int, b: int) -> "DyadKey":
        """Build a key from an unordered pair, rejecting self-pairs."""
        if a == b:
            raise DataError(f"self-dyad ({a}, {b}) is not a valid pair")
        if a < 0 or b < 0:
            raise DataError(f"unit ids must be non-negative, got ({a}, {b})")
        return cls(a, b) if a < b else cls(b, a)


def _check_canonical(i, j):
    if np.any(i < 0):
        raise ValueError("unit ids must be non-negative")
    if np.any(i >= j):
        raise ValueError("dyad keys must be canonical with i < j")


def dyad_index(key, n_units):
    """Map a canonical dyad key to its dense lexicographic index.

    Parameters
    ----------
    key : DyadKey, tuple, or pair of integer arrays
        Canonical pair(s) with ``i < j``.
    n_units : int
        Number of units N.  Keys with ``j >= n_units`` are rejected.

    Returns
    -------
    int or ndarray
        Index in ``[0, N*(N-1)/2)``; the first key (0, 1) maps to 0 and the
        last (N-2, N-1) maps to ``N*(N-1)/2 - 1``.
    """
    i, j = key
    scalar = np.isscalar(i) or (np.ndim(i) == 0 and np.ndim(j) == 0)
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    _check_canonical(i, j)
    if np.any(j >= n_units):
        raise IndexError(f"unit id out of range for n_units={n_units}")
    idx = i * (2 * n_units - i - 1) // 2 + (j - i - 1)
    return int(idx) if scalar else idx


def _row_offset(i, n_units):
    # number of canonical keys preceding row i, i.e. index of (i, i + 1)
    return i * (2 * n_units - i - 1) // 2


def dyad_members(index, n_units):
    """Invert :func:`dyad_index`: recover the canonical key for a dense index.

    Accepts a scalar or an integer array; round-trips exactly with
    ``dyad_index`` for every index below ``N*(N-1)/2``.
    """
    n_dyads = n_units * (n_units - 1) // 2
    if np.isscalar(index) or np.ndim(index) == 0:
        d = int(index)
        if d < 0 or d >= n_dyads:
            raise IndexError(f"dyad index {d} out of range for n_units={n_units}")
        # row from the quadratic bound, then exact integer fix-up
        s = math.isqrt((2 * n_units - 1) ** 2 - 8 * d)
        i = (2 * n_units - 1 - s) // 2
        while i > 0 and _row_offset(i, n_units) > d:
            i -= 1
        while _row_offset(i + 1, n_units) <= d:
            i += 1
        j = d - _row_offset(i, n_units) + i + 1
        return DyadKey(int(i), int(j))

    d = np.asarray(index, dtype=np.int64)
    if d.size and (d.min() < 0 or d.max() >= n_dyads):
        raise IndexError(f"dyad index out of range for n_units={n_units}")
    s = np.sqrt((2 * n_units - 1) ** 2 - 8.0 * d)
    i = ((2 * n_units - 1 - s) // 2).astype(np.int64)
    np.clip(i, 0, max(n_units - 2, 0), out=i)
    # the float sqrt can be off by one row in either direction
    for _ in range(2):
        i -= (_row_offset(i, n_units) > d) & (i > 0)
        i += _row_offset(i + 1, n_units) <= d
    j = d - _row_offset(i, n_units) + i + 1
    return i, j


def shares_member(a, b) -> bool:
    """True when two distinct canonical dyads have a unit in common.

    A dyad does not share a member with itself: the adjacency set of ``a``
    excludes ``a``, so callers that need the diagonal term handle it
    separately.
    """
    ai, aj = a
    bi, bj = b
    _check_canonical(np.asarray(ai), np.asarray(aj))
    _check_canonical(np.asarray(bi), np.asarray(bj))
    if ai == bi and aj == bj:
        return False
    return ai == bi or ai == bj or aj == bi or aj == bj


def unit_cluster(dataset: "DyadDataset", unit: int) -> np.ndarray:
    """Row indices of every observation whose dyad contains ``unit``.

    Each row belongs to exactly two unit clusters, one per member of its
    dyad.
    """
    if not 0 <= unit < dataset.n_units:
        raise IndexError(f"unit {unit} out of range for n_units={dataset.n_units}")
    return np.flatnonzero((dataset.unit_i == unit) | (dataset.unit_j == unit))


def _frozen_array(values, dtype):
    out = np.ascontiguousarray(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DyadDataset:
    """Immutable column store of dyadic observations.

    Parameters
    ----------
    n_units : int
        Number of units N; ids must be dense, every id in ``[0, N)`` appears.
    unit_i, unit_j : array of int
        Canonical dyad members per row, ``unit_i < unit_j``.
    y : array of float
        Outcomes (0/1 for logistic fits).
    x : array of float, shape (n_rows, k)
        Regressor matrix, including any intercept column.
    t : array of int, optional
        Repeated-observation index per row (time period, or direction of a
        directed pair); defaults to 0.  ``(dyad, t)`` must be unique.
    w : array of float, optional
        Strictly positive observation weights; defaults to 1.
    x_names : tuple of str, optional
        Regressor column labels.

    Notes
    -----
    The dyad set need not be complete: any subset of the ``N*(N-1)/2``
    possible pairs is valid, and units appearing in a single dyad need no
    special treatment anywhere downstream.
    """

    n_units: int
    unit_i: np.ndarray
    unit_j: np.ndarray
    y: np.ndarray
    x: np.ndarray
    t: np.ndarray | None = None
    w: np.ndarray | None = None
    x_names: tuple[str, ...] | None = None

    def __post_init__(self):
        n_units = int(self.n_units)
        ui = _frozen_array(self.unit_i, np.int64)
        uj = _frozen_array(self.unit_j, np.int64)
        y = _frozen_array(self.y, np.float64)
        x = _frozen_array(self.x, np.float64)
        n = ui.shape[0]
        if n == 0:
            raise DataError("dataset must contain at least one observation")
        if x.ndim != 2 or x.shape[0] != n:
            raise DataError(f"x must be 2-D with {n} rows, got shape {x.shape}")
        for name, arr in (("unit_j", uj), ("y", y)):
            if arr.shape != (n,):
                raise DataError(f"{name} must have shape ({n},)")
        t = np.zeros(n, dtype=np.int64) if self.t is None else _frozen_array(self.t, np.int64)
        w = np.ones(n, dtype=np.float64) if self.w is None else _frozen_array(self.w, np.float64)
        if t.shape != (n,) or w.shape != (n,):
            raise DataError(f"t and w must have shape ({n},)")

        if n_units < 2:
            raise DataError("a dyadic dataset needs at least two units")
        if ui.min() < 0 or uj.max() >= n_units:
            raise DataError("unit ids must lie in [0, n_units)")
        if np.any(ui >= uj):
            bad = int(np.flatnonzero(ui >= uj)[0])
            raise DataError(
                f"row {bad}: dyad keys must be canonical with unit_i < unit_j"
            )
        present = np.zeros(n_units, dtype=bool)
        present[ui] = True
        present[uj] = True
        if not present.all():
            missing = int(np.flatnonzero(~present)[0])
            raise DataError(
                f"unit ids must be dense: id {missing} never appears in any dyad"
            )
        if t.min() < 0:
            raise DataError("time indices must be non-negative")
        triples = np.stack([ui, uj, t], axis=1)
        if np.unique(triples, axis=0).shape[0] != n:
            raise DataError("(dyad, t) pairs must be unique within a dyad")
        if not np.all(np.isfinite(w)) or w.min() <= 0:
            raise DataError("weights must be strictly positive and finite")
        if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
            raise DataError("outcomes and regressors must be finite")
        if self.x_names is not None and len(self.x_names) != x.shape[1]:
            raise DataError("x_names must have one label per regressor column")

        object.__setattr__(self, "n_units", n_units)
        object.__setattr__(self, "unit_i", ui)
        object.__setattr__(self, "unit_j", uj)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "w", w)
        if self.x_names is not None:
            object.__setattr__(self, "x_names", tuple(self.x_names))

    @property
    def n_rows(self) -> int:
        return self.unit_i.shape[0]

    @property
    def k(self) -> int:
        return self.x.shape[1]

    @cached_property
    def dyad_code(self) -> np.ndarray:
        """Dense code of each row's dyad among the observed dyads.

        Codes follow the lexicographic order of the observed canonical keys
        and are shared by all rows of a repeated dyad.
        """
        packed = self.unit_i * self.n_units + self.unit_j
        _, codes = np.unique(packed, return_inverse=True)
        codes = codes.astype(np.int64)
        codes.setflags(write=False)
        return codes

    @cached_property
    def dyad_units(self) -> tuple[np.ndarray, np.ndarray]:
        """Member units (i, j) of each observed dyad, indexed by dyad code."""
        packed = np.unique(self.unit_i * self.n_units + self.unit_j)
        di, dj = packed // self.n_units, packed % self.n_units
        di.setflags(write=False)
        dj.setflags(write=False)
        return di, dj

    @property
    def n_dyads(self) -> int:
        """Number of distinct dyads observed (not the N*(N-1)/2 possible)."""
        return self.dyad_units[0].shape[0]

    def has_unit_weights(self) -> bool:
        return bool(np.all(self.w == 1.0))
