"""CSV ingestion and emission: return panels, dense correlation matrices,
and reproducibility metadata headers."""

from __future__ import annotations

import csv

import numpy as np

from .estimators import CorrelationMatrix, EstimatorError, ReturnPanel

__all__ = [
    "read_panel_csv",
    "write_panel_csv",
    "read_matrix_csv",
    "write_matrix_csv",
    "metadata_header",
]


def read_panel_csv(path) -> ReturnPanel:
    """Panel CSV: header ``date,TICKER1,...``, one row per day, no gaps."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader
                if row and not row[0].lstrip().startswith("#")]
    if not rows:
        raise EstimatorError(f"{path}: empty panel file")
    header = rows[0]
    if len(header) < 2 or header[0].strip().lower() != "date":
        raise EstimatorError(f"{path}: first header column must be 'date'")
    assets = tuple(h.strip() for h in header[1:])
    dates, values = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise EstimatorError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        dates.append(row[0].strip())
        try:
            values.append([float(x) for x in row[1:]])
        except ValueError as exc:
            raise EstimatorError(
                f"{path}:{lineno}: non-numeric return value") from exc
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise EstimatorError(f"{path}: missing values are forbidden")
    return ReturnPanel(arr, assets, tuple(dates))


def write_panel_csv(path, panel: ReturnPanel, header_lines=()) -> None:
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(["date", *panel.asset_ids])
        for t, row in zip(panel.time_ids, panel.values):
            writer.writerow([t, *(f"{x:.12g}" for x in row)])


def read_matrix_csv(path) -> CorrelationMatrix:
    """Dense matrix CSV with a header row of asset ids."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader
                if row and not row[0].lstrip().startswith("#")]
    if len(rows) < 2:
        raise EstimatorError(f"{path}: empty matrix file")
    assets = tuple(h.strip() for h in rows[0])
    values = np.asarray([[float(x) for x in row] for row in rows[1:]],
                        dtype=float)
    if values.shape != (len(assets), len(assets)):
        raise EstimatorError(f"{path}: matrix shape does not match header")
    return CorrelationMatrix(values, {"asset_ids": assets})


def write_matrix_csv(path, M: CorrelationMatrix, asset_ids=None,
                     header_lines=()) -> None:
    assets = tuple(asset_ids or M.metadata.get("asset_ids")
                   or (f"A{i:04d}" for i in range(M.N)))
    with open(path, "w", newline="") as fh:
        for line in header_lines:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(assets)
        for row in M.values:
            writer.writerow([f"{x:.12g}" for x in row])


def metadata_header(command: str, params: dict) -> list:
    """Comment lines recording the command, its parameters, and the RNG
    identity, so reruns are byte-for-byte reproducible."""
    items = " ".join(f"{k}={v}" for k, v in sorted(params.items()))
    return [f"command: {command}", f"params: {items}"]
