"""Plain-text artifact formats.

Matrices: first line ``rows cols``, then one whitespace-separated row per
line, 17 significant digits. Index lists: one comma-separated line.
CSV tables: header row naming every column, floats with 17 significant
digits.
"""

from __future__ import annotations

import csv
import io as _io
import math
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, MissingArtifactError

__all__ = [
    "format_float",
    "write_matrix",
    "read_matrix",
    "write_indices",
    "read_indices",
    "format_csv",
    "write_csv",
    "read_csv",
    "CsvAppender",
    "ERROR_REPORT_COLUMNS",
]

ERROR_REPORT_COLUMNS = (
    "k", "m", "alpha", "mu", "scheme", "true_error", "estimated_error",
    "ratio", "cond_PtV", "qoi_value", "wall_ms",
)


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def _require(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise MissingArtifactError(f"missing artifact: {path}")
    return path


def write_matrix(path, A) -> None:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InvalidArgumentError("only 1D or 2D arrays can be written")
    lines = [f"{A.shape[0]} {A.shape[1]}"]
    lines.extend(" ".join(format_float(v) for v in row) for row in A)
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    text = _require(path).read_text().split("\n")
    try:
        rows, cols = (int(t) for t in text[0].split())
    except ValueError as err:
        raise InvalidArgumentError(f"{path}: bad matrix header") from err
    body = [ln for ln in text[1:] if ln.strip()]
    if len(body) != rows:
        raise InvalidArgumentError(f"{path}: expected {rows} rows, found {len(body)}")
    A = np.array([[float(t) for t in ln.split()] for ln in body], dtype=float).reshape(rows, cols)
    return A


def write_indices(path, indices) -> None:
    Path(path).write_text(",".join(str(int(i)) for i in indices) + "\n")


def read_indices(path) -> np.ndarray:
    text = _require(path).read_text().strip()
    if not text:
        return np.array([], dtype=int)
    return np.array([int(t) for t in text.split(",")], dtype=int)


def format_csv(rows, columns) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_format_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(path, rows, columns) -> None:
    Path(path).write_text(format_csv(rows, columns))


def _parse_cell(s: str):
    if s == "":
        return None
    for conv in (int, float):
        try:
            return conv(s)
        except ValueError:
            pass
    return s


def read_csv(path) -> list[dict]:
    with _require(path).open(newline="") as fh:
        return [{k: _parse_cell(v) for k, v in row.items()} for row in csv.DictReader(fh)]


class CsvAppender:
    """Writes rows one at a time to a CSV file, header first.

    Rows are flushed as they arrive so a crashed sweep leaves a well-formed
    prefix behind.
    """

    def __init__(self, path, columns, append: bool = False):
        self.path = Path(path)
        self.columns = tuple(columns)
        exists = append and self.path.is_file() and self.path.stat().st_size > 0
        if exists:
            with self.path.open() as fh:
                header = fh.readline().strip().split(",")
            if tuple(header) != self.columns:
                raise InvalidArgumentError(f"{self.path}: existing header differs")
        self._fh = self.path.open("a" if exists else "w", newline="")
        self._w = csv.writer(self._fh, lineterminator="\n")
        if not exists:
            self._w.writerow(self.columns)
            self._fh.flush()

    def write(self, row: dict) -> None:
        self._w.writerow([_format_cell(row.get(c)) for c in self.columns])
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
