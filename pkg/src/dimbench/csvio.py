"""CSV import/export for datasets.

CSV files are RFC-4180, optionally with a header row.  On load, the column
whose header matches the label column name becomes the labels; every other
column becomes a coordinate, keeping file order.  Coordinates are written
with the shortest decimal representation that survives a float32 round
trip, so exporting a dataset loaded from the binary container and reading
it back reproduces the same float32 values.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dataset import Dataset
from .errors import ParseError

DEFAULT_LABEL_COLUMN = "label"


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_csv(
    path: Union[str, Path], label_column: Optional[str] = None
) -> Dataset:
    """Load a rectangular numeric CSV as a Dataset.

    ``label_column`` names the header column holding class labels.  When
    omitted, a column named "label" is used if present; when given
    explicitly, its absence is an error.  A headerless file (first row
    fully numeric) never has labels.
    """
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    rows = [row for row in rows if row]  # drop blank lines
    if not rows:
        raise ParseError(f"{path}: empty CSV")

    has_header = not all(_is_float(cell) for cell in rows[0])
    header = rows[0] if has_header else None
    data_rows = rows[1:] if has_header else rows
    if not data_rows:
        raise ParseError(f"{path}: CSV has a header but no data rows")

    width = len(data_rows[0])
    label_idx: Optional[int] = None
    if header is not None:
        if len(header) != width:
            raise ParseError(
                f"{path}: header has {len(header)} columns, data rows have {width}"
            )
        wanted = label_column if label_column is not None else DEFAULT_LABEL_COLUMN
        if wanted in header:
            label_idx = header.index(wanted)
        elif label_column is not None:
            raise ParseError(
                f"{path}: no column named {label_column!r} (have {header})"
            )
    if width - (0 if label_idx is None else 1) < 1:
        raise ParseError(f"{path}: no coordinate columns")

    n = len(data_rows)
    d = width - (0 if label_idx is None else 1)
    points = np.empty((n, d), dtype=np.float64)
    labels = None if label_idx is None else np.empty(n, dtype=np.int64)
    first_line = 2 if has_header else 1
    for i, row in enumerate(data_rows):
        line = first_line + i
        if len(row) != width:
            raise ParseError(
                f"{path}: row at line {line} has {len(row)} fields, expected {width}"
            )
        j_out = 0
        for j, cell in enumerate(row):
            if j == label_idx:
                try:
                    value = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric label at line {line}, column {j + 1}: "
                        f"{cell!r}"
                    ) from None
                if value != int(value) or value < 0:
                    raise ParseError(
                        f"{path}: label at line {line} is not a nonnegative "
                        f"integer: {cell!r}"
                    )
                labels[i] = int(value)
            else:
                try:
                    points[i, j_out] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: non-numeric coordinate at line {line}, "
                        f"column {j + 1}: {cell!r}"
                    ) from None
                j_out += 1
    return Dataset(points, labels, name=Path(path).stem)


def _f32_repr(value: float) -> str:
    """Shortest decimal string that reads back as the same float32."""
    return str(np.float32(value))


def save_csv(ds: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset as CSV with an x0..x{d-1}[,label] header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        header = [f"x{j}" for j in range(ds.d)]
        if ds.has_labels:
            header.append(DEFAULT_LABEL_COLUMN)
        writer.writerow(header)
        for i in range(ds.n):
            row = [_f32_repr(v) for v in ds.points[i]]
            if ds.has_labels:
                row.append(str(int(ds.labels[i])))
            writer.writerow(row)
