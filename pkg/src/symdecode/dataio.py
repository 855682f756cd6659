"""File interchange: the plain-text CSV contract for positions, neural
features, and derived tables, plus canonical JSON report output.

CSV contract (bit-exact): UTF-8, LF line endings, '.' decimal separator,
numbers printed with %.12g.  The positions file carries header ``t,x,y``;
the features file ``t,n0,n1,...,n{M-1}``; one row per time bin, t an
integer bin index.  Malformed input is rejected with the 1-based line
number of the first offending row.

JSON reports are written deterministically: sorted keys, two-space indent,
no NaN/Infinity, trailing newline, no timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import CsvFormatError
from .types import ObservationMatrix, TrajectorySeries

_FMT = "%.12g"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return _FMT % float(v)


def write_table(path, header, columns) -> Path:
    """Write aligned columns as CSV under the interchange conventions."""
    path = Path(path)
    cols = [np.asarray(c) for c in columns]
    if len(cols) != len(header):
        raise ValueError(f"{len(header)} header fields but {len(cols)} columns")
    n = cols[0].shape[0]
    if any(c.shape[0] != n for c in cols):
        raise ValueError("all columns must share a length")
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return path


def write_positions_csv(path, x, y) -> Path:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    t = np.arange(x.shape[0], dtype=np.int64)
    return write_table(path, ["t", "x", "y"], [t, x, y])


def write_features_csv(path, values) -> Path:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError(f"feature matrix must be 2-D, got shape {values.shape}")
    t = np.arange(values.shape[0], dtype=np.int64)
    header = ["t"] + [f"n{j}" for j in range(values.shape[1])]
    return write_table(path, header, [t] + [values[:, j] for j in range(values.shape[1])])


def _read_rows(path, expected_header=None):
    """Yield (line_number, row) pairs; validate width against the header."""
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file") from None
        if expected_header is not None and header != expected_header:
            raise CsvFormatError(
                f"{path}: line 1: expected header {','.join(expected_header)!r}, got {','.join(header)!r}"
            )
        width = len(header)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise CsvFormatError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
            rows.append((lineno, row))
    return header, rows


def _parse_float(path, lineno, field, text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise CsvFormatError(f"{path}: line {lineno}: non-numeric value {text!r} in column {field}") from None
    if not np.isfinite(v):
        raise CsvFormatError(f"{path}: line {lineno}: non-finite value {text!r} in column {field}")
    return v


def read_positions_csv(path):
    """Parse a positions file; returns (t, x, y) arrays."""
    header, rows = _read_rows(path, expected_header=["t", "x", "y"])
    t = np.empty(len(rows), dtype=np.int64)
    x = np.empty(len(rows))
    y = np.empty(len(rows))
    for i, (lineno, row) in enumerate(rows):
        t[i] = int(_parse_float(path, lineno, "t", row[0]))
        x[i] = _parse_float(path, lineno, "x", row[1])
        y[i] = _parse_float(path, lineno, "y", row[2])
    return t, x, y


def read_features_csv(path):
    """Parse a neural-features file; returns (t, values) with values K x M."""
    header, rows = _read_rows(path)
    if not header or header[0] != "t":
        raise CsvFormatError(f"{path}: line 1: first column must be 't', got {header[:1]!r}")
    expected = [f"n{j}" for j in range(len(header) - 1)]
    if header[1:] != expected:
        raise CsvFormatError(f"{path}: line 1: feature columns must be n0..n{len(header) - 2} in order")
    m = len(header) - 1
    if m < 1:
        raise CsvFormatError(f"{path}: line 1: at least one feature column required")
    t = np.empty(len(rows), dtype=np.int64)
    values = np.empty((len(rows), m))
    for i, (lineno, row) in enumerate(rows):
        t[i] = int(_parse_float(path, lineno, "t", row[0]))
        for j in range(m):
            values[i, j] = _parse_float(path, lineno, f"n{j}", row[j + 1])
    return t, values


def ingest_csv(positions_path, features_path):
    """Load and pair a positions/features file set.

    Returns (traj_x, traj_y, observations).  Row counts and t columns must
    agree between the two files.
    """
    t_pos, x, y = read_positions_csv(positions_path)
    t_feat, values = read_features_csv(features_path)
    if t_pos.shape[0] != t_feat.shape[0]:
        raise CsvFormatError(
            f"row count mismatch: {positions_path} has {t_pos.shape[0]} rows, "
            f"{features_path} has {t_feat.shape[0]}"
        )
    if t_pos.shape[0] == 0:
        raise CsvFormatError(f"{positions_path}: no data rows")
    if not np.array_equal(t_pos, t_feat):
        k = int(np.argmax(t_pos != t_feat))
        raise CsvFormatError(
            f"t columns disagree at data row {k + 1}: {t_pos[k]} vs {t_feat[k]}"
        )
    return (
        TrajectorySeries(axis="x", positions=x),
        TrajectorySeries(axis="y", positions=y),
        ObservationMatrix(values=values),
    )


def canonical_json(obj) -> str:
    """Deterministic JSON encoding: sorted keys, indent 2, no NaN."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_report(path, obj) -> Path:
    path = Path(path)
    path.write_bytes(canonical_json(obj).encode("utf-8"))
    return path
