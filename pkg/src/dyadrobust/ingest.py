"""CSV ingestion for dyadic panels.

Maps a flat file with one row per (dyad, period) observation onto a
validated :class:`~dyadrobust.dyads.DyadDataset`.  Unit labels may be
arbitrary strings; they are densified to integer ids in first-appearance
order, and each row's pair is canonicalized so the lower id comes first.
Undirected input may therefore list a pair in either order; listing it in
both orders for the same period is a duplicate.

Directed input is different: pass ``directed=True`` and each (sender,
receiver, t) row is kept as a separate observation of the undirected dyad,
encoded by a synthetic period ``2 * t + direction``.  Clustering then
treats the two directions as repeated observations of one dyad, which is
the behaviour the robust estimators need; duplicates are detected per
direction.

All validation failures point at the 1-based line of the offending row.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyads import DyadDataset
from .errors import DataError

__all__ = ["CsvSchemaSpec", "IngestResult", "ingest_csv", "write_csv"]

_STRUCTURAL_FIELDS = ("unit_i", "unit_j", "outcome", "time", "weight")


@dataclass(frozen=True)
class CsvSchemaSpec:
    """Names of the columns carrying each role.

    ``regressors`` is either the literal string ``"rest"`` (every column
    not claimed by another role, in header order) or an explicit sequence
    of column names.  ``add_intercept`` prepends a column of ones named
    ``const`` to whatever the regressors are.
    """

    unit_i: str
    unit_j: str
    outcome: str
    regressors: str | Sequence[str] = "rest"
    time: str | None = None
    weight: str | None = None
    add_intercept: bool = True

    def __post_init__(self):
        if self.unit_i == self.unit_j:
            raise DataError("unit_i and unit_j must name distinct columns")
        named = [self.unit_i, self.unit_j, self.outcome]
        if self.time is not None:
            named.append(self.time)
        if self.weight is not None:
            named.append(self.weight)
        if len(set(named)) != len(named):
            raise DataError("schema assigns one column to multiple roles")
        if isinstance(self.regressors, str):
            if self.regressors != "rest":
                raise DataError(
                    'regressors must be "rest" or a sequence of column names'
                )
        else:
            object.__setattr__(self, "regressors", tuple(self.regressors))
            if not self.regressors:
                raise DataError("regressors must name at least one column")
            overlap = set(self.regressors) & set(named)
            if overlap:
                raise DataError(
                    f"columns {sorted(overlap)} already hold schema roles and "
                    "cannot also be regressors"
                )


@dataclass(frozen=True)
class IngestResult:
    """A validated dataset plus the label maps needed to talk back to the
    source file: ``unit_labels[id]`` is the original label of unit ``id``,
    and ``time_labels`` similarly when a time column was given."""

    dataset: DyadDataset
    unit_labels: tuple[str, ...]
    time_labels: tuple[str, ...] | None


def _column_index(header: list[str], name: str) -> int:
    try:
        return header.index(name)
    except ValueError:
        raise DataError(f"column {name!r} not found in header {header}") from None


def _parse_float(value: str, column: str, line: int) -> float:
    try:
        parsed = float(value)
    except ValueError:
        raise DataError(
            f"line {line}: non-numeric value {value!r} in column {column!r}"
        ) from None
    if not np.isfinite(parsed):
        raise DataError(f"line {line}: non-finite value in column {column!r}")
    return parsed


def _order_time_labels(values: set[str]) -> tuple[str, ...]:
    # purely a labelling order; estimators never read the time axis beyond
    # distinguishing repeated observations
    try:
        return tuple(sorted(values, key=float))
    except ValueError:
        return tuple(sorted(values))


def ingest_csv(path, schema: CsvSchemaSpec, directed: bool = False) -> IngestResult:
    """Read, validate, and densify a dyadic CSV panel.

    Raises :class:`DataError` (with the offending line number) on a missing
    column, a self-dyad row, a duplicate (dyad, period) observation, a
    non-numeric cell, or a nonpositive weight.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: file is empty, header required") from None
        col_i = _column_index(header, schema.unit_i)
        col_j = _column_index(header, schema.unit_j)
        col_y = _column_index(header, schema.outcome)
        col_t = None if schema.time is None else _column_index(header, schema.time)
        col_w = None if schema.weight is None else _column_index(header, schema.weight)
        if schema.regressors == "rest":
            claimed = {col_i, col_j, col_y, col_t, col_w}
            x_names = [c for k, c in enumerate(header) if k not in claimed]
            if not x_names and not schema.add_intercept:
                raise DataError("no columns left over to use as regressors")
        else:
            x_names = list(schema.regressors)
        col_x = [_column_index(header, c) for c in x_names]

        unit_ids: dict[str, int] = {}
        rows_i, rows_j, swapped, y, w, x, t_raw, lines = [], [], [], [], [], [], [], []
        for record in reader:
            line = reader.line_num
            if not record:
                continue
            if len(record) != len(header):
                raise DataError(
                    f"line {line}: expected {len(header)} fields, got {len(record)}"
                )
            label_a, label_b = record[col_i], record[col_j]
            if label_a == label_b:
                raise DataError(
                    f"line {line}: self-dyad ({label_a!r} paired with itself)"
                )
            a = unit_ids.setdefault(label_a, len(unit_ids))
            b = unit_ids.setdefault(label_b, len(unit_ids))
            rows_i.append(min(a, b))
            rows_j.append(max(a, b))
            swapped.append(a > b)
            y.append(_parse_float(record[col_y], schema.outcome, line))
            x.append([_parse_float(record[c], header[c], line) for c in col_x])
            if col_w is not None:
                weight = _parse_float(record[col_w], schema.weight, line)
                if weight <= 0:
                    raise DataError(
                        f"line {line}: nonpositive weight {weight!r}"
                    )
                w.append(weight)
            t_raw.append("" if col_t is None else record[col_t])
            lines.append(line)

    if not rows_i:
        raise DataError(f"{path}: no data rows")

    time_labels = None
    if col_t is not None:
        time_labels = _order_time_labels(set(t_raw))
        code_of = {label: c for c, label in enumerate(time_labels)}
        t_codes = np.array([code_of[v] for v in t_raw], dtype=np.int64)
    else:
        t_codes = np.zeros(len(rows_i), dtype=np.int64)
    if directed:
        t_codes = 2 * t_codes + np.array(swapped, dtype=np.int64)

    unit_i = np.array(rows_i, dtype=np.int64)
    unit_j = np.array(rows_j, dtype=np.int64)
    # find duplicates before handing off so the error can cite file lines
    key = (unit_i * len(unit_ids) + unit_j) * (t_codes.max() + 1) + t_codes
    _, first, counts = np.unique(key, return_index=True, return_counts=True)
    if np.any(counts > 1):
        dup_key = key[first[np.argmax(counts > 1)]]
        dup_lines = [lines[r] for r in np.flatnonzero(key == dup_key)]
        raise DataError(
            f"line {dup_lines[1]}: duplicate observation of the dyad on line "
            f"{dup_lines[0]} (same pair and period"
            + ("" if not directed else " and direction")
            + ")"
        )

    x_arr = np.array(x, dtype=float)
    if schema.add_intercept:
        x_arr = np.column_stack([np.ones(x_arr.shape[0]), x_arr])
        x_names = ["const"] + x_names
    dataset = DyadDataset(
        n_units=len(unit_ids),
        unit_i=unit_i,
        unit_j=unit_j,
        y=np.array(y, dtype=float),
        x=x_arr,
        t=t_codes,
        w=np.array(w, dtype=float) if w else None,
        x_names=tuple(x_names),
    )
    # ids were assigned in first-appearance order, matching dict insertion
    unit_labels = tuple(unit_ids)
    return IngestResult(dataset=dataset, unit_labels=unit_labels, time_labels=time_labels)


def write_csv(dataset: DyadDataset, path, unit_labels: Sequence[str] | None = None) -> None:
    """Write a dataset to CSV in a form :func:`ingest_csv` can read back.

    Floats are written with ``repr`` so the round trip is exact.  The file
    always carries ``t`` and ``weight`` columns and the regressor columns
    as stored, so re-ingest with ``add_intercept=False`` to avoid stacking
    a second constant.
    """
    if unit_labels is not None and len(unit_labels) != dataset.n_units:
        raise DataError("unit_labels must cover every unit id")
    x_names = dataset.x_names or tuple(f"x{k}" for k in range(dataset.k))
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["unit_i", "unit_j", "t", "weight", "y", *x_names])
        for r in range(dataset.n_rows):
            i, j = int(dataset.unit_i[r]), int(dataset.unit_j[r])
            label_i = unit_labels[i] if unit_labels is not None else i
            label_j = unit_labels[j] if unit_labels is not None else j
            writer.writerow(
                [
                    label_i,
                    label_j,
                    int(dataset.t[r]),
                    repr(float(dataset.w[r])),
                    repr(float(dataset.y[r])),
                    *(repr(float(v)) for v in dataset.x[r]),
                ]
            )
