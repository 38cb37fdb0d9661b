"""Categorical data tables: schema, storage and CSV round-tripping.

All predictor columns are categorical (level labels are strings); the single
target column is numeric. Levels are kept in a stable order so that
downstream one-hot encodings are reproducible across runs.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = ["Schema", "DataTable", "load_csv", "write_csv", "validate_table"]


@dataclass(frozen=True)
class Schema:
    """Feature universe: ordered (name, levels) pairs plus the target name."""

    features: tuple[tuple[str, tuple[str, ...]], ...]
    target: str

    def __post_init__(self):
        names = [name for name, _ in self.features]
        if any(not n for n in names):
            raise ValueError("feature names must be non-empty")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique")
        if self.target in names:
            raise ValueError(f"target {self.target!r} collides with a feature name")
        if not self.target:
            raise ValueError("target name must be non-empty")
        for name, levels in self.features:
            if len(levels) < 2:
                raise ValueError(f"feature {name!r} needs at least 2 levels")
            if len(set(levels)) != len(levels):
                raise ValueError(f"feature {name!r} has duplicate levels")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.features)

    def levels(self, name: str) -> tuple[str, ...]:
        for fname, levels in self.features:
            if fname == name:
                return levels
        raise KeyError(f"unknown feature {name!r}")

    def feature_index(self, name: str) -> int:
        for i, (fname, _) in enumerate(self.features):
            if fname == name:
                return i
        raise KeyError(f"unknown feature {name!r}")


@dataclass(eq=False)
class DataTable:
    """Rows of per-feature level indices plus the numeric target vector.

    Arrays are frozen after construction; instances are safe to share across
    threads. Invariants are checked by ``validate_table`` (diagnostics), not
    at construction, so malformed tables can be represented and reported on.
    """

    schema: Schema
    rows: np.ndarray = field(repr=False)  # (n, n_features) integer level indices
    target: np.ndarray = field(repr=False)  # (n,) float

    def __post_init__(self):
        rows = np.ascontiguousarray(np.asarray(self.rows, dtype=np.int64))
        target = np.ascontiguousarray(np.asarray(self.target, dtype=np.float64))
        if rows.ndim != 2 or rows.shape[1] != len(self.schema.features):
            raise ValueError("rows must be (n, n_features)")
        if target.ndim != 1:
            raise ValueError("target must be one-dimensional")
        rows.setflags(write=False)
        target.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "target", target)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    def level_labels(self, feature: str) -> np.ndarray:
        """Decode one feature column back to its string labels."""
        idx = self.schema.feature_index(feature)
        levels = np.asarray(self.schema.levels(feature), dtype=object)
        return levels[self.rows[:, idx]]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DataTable):
            return NotImplemented
        return (
            self.schema == other.schema
            and np.array_equal(self.rows, other.rows)
            and np.array_equal(self.target, other.target)
        )


def validate_table(table: DataTable) -> list[str]:
    """Return a list of invariant violations (empty when the table is sound)."""
    problems: list[str] = []
    if table.n < 1:
        problems.append("table is empty (n=0)")
    if table.target.shape[0] != table.n:
        problems.append(
            f"target length {table.target.shape[0]} != row count {table.n}"
        )
    for j, (name, levels) in enumerate(table.schema.features):
        col = table.rows[:, j]
        bad = np.nonzero((col < 0) | (col >= len(levels)))[0]
        for i in bad:
            problems.append(
                f"row {i}: feature {name!r} level index {col[i]} out of range "
                f"(0..{len(levels) - 1})"
            )
    return problems


def load_csv(path, target_column: str) -> DataTable:
    """Load an RFC-4180 CSV with a header row into a DataTable.

    Every column except ``target_column`` is treated as categorical, numeric
    looking or not. Levels are the sorted distinct values observed per
    column; row order is preserved. Missing (empty) cells are rejected.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file has no header row") from None
        if target_column not in header:
            raise ValueError(
                f"{path}: target column {target_column!r} not found "
                f"(columns: {', '.join(header)})"
            )
        tcol = header.index(target_column)
        feat_cols = [j for j in range(len(header)) if j != tcol]
        raw: list[list[str]] = []
        target_vals: list[float] = []
        for i, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise ValueError(
                    f"{path}: row {i} has {len(record)} fields, expected {len(header)}"
                )
            for j in feat_cols:
                if record[j] == "":
                    raise ValueError(
                        f"{path}: row {i}: missing value in column {header[j]!r}"
                    )
            try:
                target_vals.append(float(record[tcol]))
            except ValueError:
                raise ValueError(
                    f"{path}: row {i}: target {target_column!r} value "
                    f"{record[tcol]!r} is not numeric"
                ) from None
            raw.append([record[j] for j in feat_cols])

    if not raw:
        raise ValueError(f"{path}: table has no data rows")

    features = []
    for k, j in enumerate(feat_cols):
        observed = sorted({row[k] for row in raw})
        if len(observed) < 2:
            raise ValueError(
                f"{path}: column {header[j]!r} has a single level {observed[0]!r}; "
                "categorical features need at least 2"
            )
        features.append((header[j], tuple(observed)))
    schema = Schema(features=tuple(features), target=target_column)

    lookup = [
        {lvl: i for i, lvl in enumerate(levels)} for _, levels in schema.features
    ]
    rows = np.empty((len(raw), len(features)), dtype=np.int64)
    for i, row in enumerate(raw):
        for k, value in enumerate(row):
            rows[i, k] = lookup[k][value]
    return DataTable(schema=schema, rows=rows, target=np.asarray(target_vals))


def write_csv(table: DataTable, path) -> None:
    """Write a DataTable as CSV: feature columns in schema order, target last.

    Target values are written with ``repr`` (shortest exact form), so
    write -> load -> write round-trips byte for byte.
    """
    names = list(table.schema.feature_names)
    decoded = [table.level_labels(name) for name in names]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names + [table.schema.target])
        for i in range(table.n):
            writer.writerow(
                [decoded[k][i] for k in range(len(names))] + [repr(float(table.target[i]))]
            )
