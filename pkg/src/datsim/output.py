"""Trajectory CSV and run-summary emission.

Numbers are written with 17 significant digits so every double round-trips
exactly: write -> read -> write is byte-identical.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .metrics import MetricsRecord
from .simulator import TrajectoryLog

__all__ = ["csv_header", "format_csv", "write_csv", "read_csv", "write_summary"]


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def csv_header(n: int, p: int) -> list[str]:
    cols = ["t"]
    cols += [f"e_x_{i}" for i in range(1, n + 1)]
    cols += [f"e_v_{i}" for i in range(1, n + 1)]
    cols += [f"e_p_{i}" for i in range(1, n + 1)]
    cols += [f"e_q_{i}" for i in range(1, n + 1)]
    cols += ["V1", "V2"]
    cols += [f"S1_{k}" for k in range(1, p + 1)]
    cols += [f"S2_{k}" for k in range(1, p + 1)]
    cols += [f"sumz_{k}" for k in range(1, p + 1)]
    return cols


def _record_row(rec: MetricsRecord) -> list[str]:
    values = ([rec.t] + list(rec.e_x) + list(rec.e_v) + list(rec.e_p) + list(rec.e_q)
              + [rec.v1, rec.v2] + list(rec.s1) + list(rec.s2) + list(rec.sum_z))
    return [_fmt(float(v)) for v in values]


def format_csv(log: TrajectoryLog) -> str:
    first = log.records[0]
    n = first.e_x.shape[0]
    p = first.s1.shape[0]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(n, p))
    for rec in log.records:
        writer.writerow(_record_row(rec))
    return buf.getvalue()


def write_csv(log: TrajectoryLog, path) -> Path:
    """Write the header row plus one row per record; returns the path."""
    path = Path(path)
    path.write_text(format_csv(log), encoding="utf-8")
    return path


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Read a trajectory CSV back as (header, value matrix)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(cell) for cell in row] for row in reader]
    return header, np.array(rows)


def write_summary(log: TrajectoryLog, path) -> Path:
    path = Path(path)
    path.write_text(log.summary.text(), encoding="utf-8")
    return path
