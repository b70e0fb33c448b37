"""CSV / JSON readers and writers used by the command line."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from penscore.scoring import LabelBatch, PredictionBatch, ScoringError

SCHEMA_VERSION = 1
FLOAT_FMT = "{:.17g}"


class DataFormatError(ScoringError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def fmt(x: float) -> str:
    return FLOAT_FMT.format(x)


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataFormatError("empty file", 1)
    return [h.strip() for h in rows[0]], rows[1:]


def _parse_matrix(header: list[str], rows: list[list[str]]) -> np.ndarray:
    out = np.empty((len(rows), len(header)))
    for i, row in enumerate(rows):
        line = i + 2
        if len(row) != len(header):
            raise DataFormatError(f"expected {len(header)} fields, got {len(row)}", line)
        for j, cell in enumerate(row):
            try:
                out[i, j] = float(cell)
            except ValueError:
                raise DataFormatError(f"not a number: {cell!r}", line, j + 1) from None
    if out.shape[0] == 0:
        raise DataFormatError("no data rows", 2)
    return out


def read_predictions(path, renormalize: bool = False) -> PredictionBatch:
    """``p0..p{c-1}`` columns, one row per sample."""
    header, rows = _read_rows(path)
    expected = [f"p{j}" for j in range(len(header))]
    if header != expected:
        raise DataFormatError(f"header must be {','.join(expected)}", 1)
    return PredictionBatch(_parse_matrix(header, rows), renormalize=renormalize)


def read_labels(path, c: int | None = None) -> LabelBatch:
    """Either one-hot ``y0..y{c-1}`` columns or a single ``class`` column."""
    header, rows = _read_rows(path)
    if header == ["class"]:
        if c is None:
            raise DataFormatError("a class-index label file needs the class count", 1)
        values = _parse_matrix(header, rows)[:, 0]
        for i, v in enumerate(values):
            if v != math.floor(v) or not 0 <= v < c:
                raise DataFormatError(f"class index {v:g} not in 0..{c - 1}", i + 2, 1)
        return LabelBatch.from_classes(values.astype(np.int64), c)
    expected = [f"y{j}" for j in range(len(header))]
    if header != expected:
        raise DataFormatError(f"header must be 'class' or {','.join(expected)}", 1)
    return LabelBatch(_parse_matrix(header, rows))


def write_matrix(path, values: np.ndarray, prefix: str) -> None:
    values = np.atleast_2d(values)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{prefix}{j}" for j in range(values.shape[1])])
        for row in values:
            w.writerow([fmt(v) for v in row])


def write_predictions(path, q: PredictionBatch | np.ndarray) -> None:
    write_matrix(path, q.values if isinstance(q, PredictionBatch) else q, "p")


def write_labels(path, y: LabelBatch) -> None:
    write_matrix(path, y.values.astype(np.int64), "y")


def write_table(path, rows: list[dict], columns) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r[c]) if isinstance(r[c], float) else r[c] for c in columns])


def write_curve(path, curve) -> None:
    write_table(
        path,
        [{"trial_index": t, "cumulative_percentage": float(p)} for t, p in curve],
        ("trial_index", "cumulative_percentage"),
    )


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        # JSON has no NaN / inf
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(payload: dict) -> str:
    return json.dumps({"schema_version": SCHEMA_VERSION, **_jsonable(payload)}, indent=2) + "\n"


def write_json(path, payload: dict) -> None:
    Path(path).write_text(dumps(payload))
