"""CSV/JSON interchange for frame series, Q-Q points, forecasts and QoE tables."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .distfit import DistributionFit
from .errors import ParseError, SchemaError
from .frames import FrameSeries

SERIES_COLUMNS = ("frame_index", "size_bytes", "frame_interval_us", "eye_interval_us")


def _csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO(newline="")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _num(v) -> str:
    # repr keeps floats round-trippable; ints stay ints
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def series_to_csv(series: FrameSeries) -> str:
    """One row per frame; ``frame_interval_us`` is the gap to the previous frame (blank on row 0)."""
    rows = []
    for i, (size, eye) in enumerate(zip(series.sizes, series.eye_intervals_us)):
        interval = "" if i == 0 else _num(series.frame_intervals_us[i - 1])
        rows.append((i, _num(size), interval, _num(eye)))
    return _csv_text(SERIES_COLUMNS, rows)


def series_from_csv(text: str) -> FrameSeries:
    op = "frame_assembly.read_series"
    reader = csv.DictReader(io.StringIO(text, newline=""))
    missing = [c for c in SERIES_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise SchemaError(f"series CSV missing column(s): {', '.join(missing)}", op)
    sizes, intervals, eyes = [], [], []
    for lineno, row in enumerate(reader, start=2):
        try:
            sizes.append(int(row["size_bytes"]))
            eyes.append(int(row["eye_interval_us"]))
            if row["frame_interval_us"].strip():
                intervals.append(int(row["frame_interval_us"]))
        except ValueError as exc:
            raise ParseError(str(exc), lineno, op) from None
    return FrameSeries(np.array(sizes, dtype=np.int64), np.array(intervals, dtype=np.int64),
                       np.array(eyes, dtype=np.int64))


def read_column(path: str | Path, column: str | None = None) -> np.ndarray:
    """Read one numeric column from a CSV; blank cells are skipped.

    Without ``column`` the file must have a single column (header optional).
    """
    op = "cli.read_series"
    text = Path(path).read_text(encoding="utf-8")
    rows = list(csv.reader(io.StringIO(text, newline="")))
    if not rows:
        raise SchemaError(f"{path}: empty file", op)
    header, body, first = rows[0], rows[1:], 2
    if column is None:
        if len(header) != 1:
            raise SchemaError(f"{path}: several columns, pick one with --column", op)
        try:
            float(header[0])
            header, body, first = ["value"], rows, 1
        except ValueError:
            pass
        idx = 0
    else:
        if column not in header:
            raise SchemaError(f"{path}: no column {column!r} (have {', '.join(header)})", op)
        idx = header.index(column)
    values = []
    for lineno, row in enumerate(body, start=first):
        if idx >= len(row) or not row[idx].strip():
            continue
        try:
            values.append(float(row[idx]))
        except ValueError:
            raise ParseError(f"{row[idx]!r} is not numeric", lineno, op) from None
    return np.array(values)


def qq_to_csv(fit: DistributionFit) -> str:
    rows = ((_num(p), _num(t), _num(s)) for p, t, s in zip(fit.probabilities, fit.theoretical, fit.standardized))
    return _csv_text(("p", "theoretical", "sample"), rows)


def forecast_to_csv(report) -> str:
    rows = ((report.test_start + k, _num(a), _num(p))
            for k, (a, p) in enumerate(zip(report.actuals, report.predictions)))
    return _csv_text(("t", "actual", "predicted"), rows)


def qoe_table_to_csv(comparison) -> str:
    rows = []
    for row in comparison.table():
        rows.append((row["scenario"], row["window"], _num(row["q"]), _num(row["p"]), _num(row["g"]),
                     _num(row["qoe"])))
    return _csv_text(("scenario", "window", "q", "p", "g", "qoe"), rows)


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, numpy scalars and arrays converted."""
    def default(o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not JSON serializable: {type(o).__name__}")
    return json.dumps(obj, sort_keys=True, indent=2, default=default, allow_nan=True)
