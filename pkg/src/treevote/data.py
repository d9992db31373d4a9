"""Schema-typed tabular data and CSV ingestion.

A ``Dataset`` is a list of rows over a fixed ``Schema``: every column is
either categorical (string tokens) or numeric (finite floats), and the
target is a categorical column with a declared, ordered class list.
Rows are stored as tuples in schema column order and never mutated.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .errors import DataLoadError, SchemaMismatchError
from .numformat import format_number

CATEGORICAL = "categorical"
NUMERIC = "numeric"

#: Reserved token a blank categorical cell is mapped to on load.
MISSING = "__MISSING__"


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # CATEGORICAL or NUMERIC

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("column name must be non-empty")
        if self.kind not in (CATEGORICAL, NUMERIC):
            raise ValueError(f"unknown column kind {self.kind!r}")


@dataclass(frozen=True)
class Schema:
    """Ordered columns, the target column name, and the class order."""

    columns: tuple[Column, ...]
    target: str
    classes: tuple[str, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise ValueError("column names must be unique")
        if self.target not in names:
            raise ValueError(f"target {self.target!r} is not a column")
        if self.column(self.target).kind != CATEGORICAL:
            raise ValueError("target column must be categorical")
        if not self.classes:
            raise ValueError("class list must be non-empty")
        if len(set(self.classes)) != len(self.classes):
            raise ValueError("class labels must be unique")

    def column(self, name: str) -> Column:
        for col in self.columns:
            if col.name == name:
                return col
        raise KeyError(name)

    def index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise KeyError(name)

    @property
    def target_index(self) -> int:
        return self.index(self.target)

    def feature_names(self) -> list[str]:
        return [c.name for c in self.columns if c.name != self.target]

    def class_index(self, label: str) -> int:
        return self.classes.index(label)


@dataclass(frozen=True)
class Dataset:
    """Immutable rows over a schema.

    Row values are stored in schema column order: ``str`` for
    categorical cells and ``float`` for numeric cells.
    """

    schema: Schema
    rows: tuple[tuple, ...]
    validate: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.validate:
            self._check_rows()

    def _check_rows(self) -> None:
        ncol = len(self.schema.columns)
        t_idx = self.schema.target_index
        classes = set(self.schema.classes)
        for r, row in enumerate(self.rows):
            if len(row) != ncol:
                raise SchemaMismatchError(
                    f"row {r} has {len(row)} values, schema has {ncol} columns"
                )
            for col, value in zip(self.schema.columns, row):
                if col.kind == NUMERIC:
                    if not isinstance(value, float) or not math.isfinite(value):
                        raise SchemaMismatchError(
                            f"row {r} column {col.name!r}: expected finite "
                            f"number, got {value!r}"
                        )
                elif not isinstance(value, str):
                    raise SchemaMismatchError(
                        f"row {r} column {col.name!r}: expected category "
                        f"token, got {value!r}"
                    )
            label = row[t_idx]
            if label == MISSING:
                raise SchemaMismatchError(f"row {r}: missing target value")
            if label not in classes:
                raise SchemaMismatchError(
                    f"row {r}: unknown target label {label!r}"
                )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column_values(self, name: str) -> list:
        idx = self.schema.index(name)
        return [row[idx] for row in self.rows]

    def target_values(self) -> list[str]:
        return self.column_values(self.schema.target)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        rows = tuple(self.rows[i] for i in indices)
        return Dataset(self.schema, rows, validate=False)

    def drop_columns(self, names: Sequence[str]) -> "Dataset":
        """New dataset without the named feature columns."""
        drop = set(names)
        if self.schema.target in drop:
            raise ValueError("cannot drop the target column")
        keep = [i for i, c in enumerate(self.schema.columns) if c.name not in drop]
        schema = Schema(
            columns=tuple(self.schema.columns[i] for i in keep),
            target=self.schema.target,
            classes=self.schema.classes,
        )
        rows = tuple(tuple(row[i] for i in keep) for row in self.rows)
        return Dataset(schema, rows, validate=False)

    def row_record(self, i: int) -> dict:
        return dict(zip((c.name for c in self.schema.columns), self.rows[i]))


def load_csv(text: str | IO[str], schema: Schema) -> Dataset:
    """Parse RFC-4180 CSV with a header row into a ``Dataset``.

    The header must contain exactly the schema's column names, in any
    order. Numeric cells are parsed as floats; categorical cells are
    taken verbatim, with blanks mapped to the reserved missing token.
    A blank numeric cell is a load error, as is an unknown target label.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DataLoadError("empty input: no header row") from None

    names = [c.name for c in schema.columns]
    if sorted(header) != sorted(names):
        raise DataLoadError(
            f"header {header!r} does not match schema columns {names!r}"
        )
    order = [header.index(n) for n in names]

    classes = set(schema.classes)
    t_idx = schema.target_index
    rows = []
    for r, raw in enumerate(reader, start=1):
        if len(raw) != len(header):
            raise DataLoadError(
                f"row {r}: expected {len(header)} cells, got {len(raw)}"
            )
        values = []
        for col, src in zip(schema.columns, order):
            cell = raw[src]
            if col.kind == NUMERIC:
                if cell == "":
                    raise DataLoadError(
                        f"row {r}, column {col.name!r}: missing numeric value"
                    )
                try:
                    value = float(cell)
                except ValueError:
                    raise DataLoadError(
                        f"row {r}, column {col.name!r}: cannot parse "
                        f"{cell!r} as a number"
                    ) from None
                if not math.isfinite(value):
                    raise DataLoadError(
                        f"row {r}, column {col.name!r}: non-finite value {cell!r}"
                    )
                values.append(value)
            else:
                values.append(cell if cell != "" else MISSING)
        label = values[t_idx]
        if label == MISSING:
            raise DataLoadError(f"row {r}: missing target value")
        if label not in classes:
            raise DataLoadError(f"row {r}: unknown target label {label!r}")
        rows.append(tuple(values))

    if not rows:
        raise DataLoadError("empty input: header but no data rows")
    return Dataset(schema, tuple(rows), validate=False)


def write_csv(data: Dataset) -> str:
    """Serialize a dataset back to CSV in schema column order.

    Numerics are written with at most 6 fractional digits and no
    exponent; loading the output reproduces the dataset up to that
    quantization.
    """
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([c.name for c in data.schema.columns])
    kinds = [c.kind for c in data.schema.columns]
    for row in data.rows:
        writer.writerow(
            [
                format_number(v) if kind == NUMERIC else v
                for kind, v in zip(kinds, row)
            ]
        )
    return out.getvalue()
