"""Survey table loading and preprocessing.

The preprocessing policy is column-wise complete-case: columns with any
missing response are dropped whole, rows are never dropped and nothing
is imputed. Composite targets are built by summing named item columns,
which are then removed from the feature pool. Classification targets
come from a strict median split of a continuous score.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np


@dataclass(frozen=True)
class RawTable:
    """A parsed delimited table; missing cells are NaN."""

    column_names: tuple[str, ...]
    cells: np.ndarray

    def __post_init__(self) -> None:
        names = tuple(self.column_names)
        cells = np.asarray(self.cells, dtype=np.float64)
        if cells.ndim != 2:
            raise ValueError("cells must be a 2-d grid")
        if cells.shape[1] != len(names):
            raise ValueError(
                f"{len(names)} column names for {cells.shape[1]} columns of data"
            )
        if any(not name for name in names):
            raise ValueError("column names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        cells.setflags(write=False)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "cells", cells)

    @property
    def n_rows(self) -> int:
        return int(self.cells.shape[0])

    @property
    def n_cols(self) -> int:
        return int(self.cells.shape[1])

    def column(self, name: str) -> np.ndarray:
        return self.cells[:, self.column_index(name)]

    def column_index(self, name: str) -> int:
        try:
            return self.column_names.index(name)
        except ValueError:
            raise KeyError(f"no column named {name!r}") from None

    def missing_mask(self) -> np.ndarray:
        return np.isnan(self.cells)


@dataclass(frozen=True)
class BinaryTarget:
    """Median-split class labels with the threshold that produced them."""

    labels: np.ndarray
    threshold: float

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.uint8)
        if labels.ndim != 1:
            raise ValueError("labels must be 1-d")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if labels.min() == labels.max():
            raise ValueError("both classes must be non-empty")
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


@dataclass(frozen=True)
class Dataset:
    """Complete feature matrix plus named continuous target vectors."""

    feature_names: tuple[str, ...]
    X: np.ndarray
    targets: Mapping[str, np.ndarray]
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        names = tuple(self.feature_names)
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(names):
            raise ValueError("X must be n x p with p matching feature_names")
        if np.isnan(X).any():
            raise ValueError("X contains missing cells; apply drop_missing_columns first")
        targets = {}
        for name, vec in self.targets.items():
            arr = np.asarray(vec, dtype=np.float64).ravel()
            if arr.size != X.shape[0]:
                raise ValueError(f"target {name!r} has length {arr.size}, expected {X.shape[0]}")
            if np.isnan(arr).any():
                raise ValueError(f"target {name!r} contains missing values")
            arr.setflags(write=False)
            targets[name] = arr
        if set(names) & set(targets):
            raise ValueError("feature names and target names must be disjoint")
        X.setflags(write=False)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "targets", targets)

    @property
    def n_rows(self) -> int:
        return int(self.X.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.X.shape[1])


def load_table(path, delimiter: str = ",", missing_values: Sequence[str] = ("",)) -> RawTable:
    """Parse a delimited text file with a header row into a :class:`RawTable`.

    Cells matching one of ``missing_values`` (after stripping spaces)
    are marked missing; anything else must parse as a number.
    """
    missing = {m.strip() for m in missing_values}
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty, expected a header row") from None
        names = tuple(name.strip() for name in header)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(names):
                raise ValueError(
                    f"{path}: line {line_no} has {len(row)} cells, expected {len(names)}"
                )
            parsed = np.empty(len(names))
            for col, cell in enumerate(row):
                text = cell.strip()
                if text in missing:
                    parsed[col] = np.nan
                else:
                    try:
                        parsed[col] = float(text)
                    except ValueError:
                        raise ValueError(
                            f"{path}: non-numeric cell {cell!r} at row {line_no - 1}, "
                            f"column {names[col]!r}"
                        ) from None
            rows.append(parsed)
    cells = np.vstack(rows) if rows else np.empty((0, len(names)))
    return RawTable(column_names=names, cells=cells)


def _format_cell(value: float) -> str:
    if np.isnan(value):
        return ""
    if float(value).is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


def write_table(table: RawTable, path, delimiter: str = ",") -> None:
    """Write a table back to delimited text; missing cells become empty."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, delimiter=delimiter, lineterminator="\n")
        writer.writerow(table.column_names)
        for row in table.cells:
            writer.writerow([_format_cell(v) for v in row])


def drop_missing_columns(table: RawTable) -> tuple[RawTable, list[str]]:
    """Remove every column containing at least one missing cell.

    Retained columns keep their original order. Raises when nothing
    survives, since a fully incomplete table cannot be analyzed.
    """
    complete = ~table.missing_mask().any(axis=0)
    if not complete.any():
        raise ValueError("every column contains missing values; nothing to analyze")
    dropped = [name for name, keep in zip(table.column_names, complete) if not keep]
    kept_names = tuple(name for name, keep in zip(table.column_names, complete) if keep)
    return RawTable(column_names=kept_names, cells=table.cells[:, complete]), dropped


def compose_sum_target(table: RawTable, item_columns: Sequence[str], name: str) -> RawTable:
    """Append a row-wise sum of the item columns and retire the items.

    The items (typically the nine mood items of one survey wave) must
    exist, be distinct, and be complete. The summed column is appended
    at the end under ``name``.
    """
    items = list(item_columns)
    if not items:
        raise ValueError("item_columns must not be empty")
    if len(set(items)) != len(items):
        raise ValueError("item_columns contains duplicate labels")
    indices = [table.column_index(item) for item in items]
    block = table.cells[:, indices]
    if np.isnan(block).any():
        bad = [items[i] for i in range(len(items)) if np.isnan(block[:, i]).any()]
        raise ValueError(f"item columns contain missing cells: {bad}")
    keep = [i for i in range(table.n_cols) if i not in set(indices)]
    remaining = tuple(table.column_names[i] for i in keep)
    if name in remaining:
        raise ValueError(f"column {name!r} already exists")
    summed = block.sum(axis=1, keepdims=True)
    cells = np.hstack([table.cells[:, keep], summed])
    return RawTable(column_names=remaining + (name,), cells=cells)


def binarize_target(y) -> BinaryTarget:
    """Split a continuous score at its median: label 1 iff strictly above.

    Only the rank order of ``y`` matters, so any strictly increasing
    transform of the score yields identical labels.
    """
    arr = np.asarray(y, dtype=np.float64).ravel()
    if arr.size < 2:
        raise ValueError("need at least two observations to binarize")
    if np.isnan(arr).any():
        raise ValueError("target contains missing values")
    if np.unique(arr).size < 2:
        raise ValueError("constant target cannot be split")
    threshold = float(np.median(arr))
    labels = (arr > threshold).astype(np.uint8)
    if labels.min() == labels.max():
        raise ValueError(
            "median split left one class empty (values pile up at the median)"
        )
    return BinaryTarget(labels=labels, threshold=threshold)


@dataclass(frozen=True)
class TargetSpec:
    """How to obtain one named target: sum item columns, or take one as-is."""

    name: str
    items: tuple[str, ...] = ()
    column: str | None = None

    def __post_init__(self) -> None:
        if bool(self.items) == (self.column is not None):
            raise ValueError(f"target {self.name!r}: give either items or a column")
        object.__setattr__(self, "items", tuple(self.items))


def build_dataset(
    table: RawTable,
    targets: Sequence[TargetSpec],
    dropped_columns: Sequence[str] = (),
) -> Dataset:
    """Assemble a :class:`Dataset` from a complete table and target specs."""
    if not targets:
        raise ValueError("at least one target must be declared")
    composed = {}
    for spec in targets:
        if spec.items:
            table = compose_sum_target(table, spec.items, spec.name)
            composed[spec.name] = list(spec.items)
        elif spec.column != spec.name:
            # Direct targets keep their declared name even when sourced
            # from a differently labeled column.
            idx = table.column_index(spec.column)
            names = list(table.column_names)
            names[idx] = spec.name
            table = RawTable(column_names=tuple(names), cells=table.cells)
    target_names = [spec.name for spec in targets]
    target_vectors = {name: table.column(name) for name in target_names}
    feature_names = tuple(n for n in table.column_names if n not in set(target_names))
    feature_idx = [table.column_index(n) for n in feature_names]
    meta = {
        "dropped_columns": list(dropped_columns),
        "composed_targets": composed,
        "shape": [table.n_rows, len(feature_names)],
    }
    return Dataset(
        feature_names=feature_names,
        X=table.cells[:, feature_idx],
        targets=target_vectors,
        meta=meta,
    )
