"""Report and time-series persistence: JSON documents and flat CSV files."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Sequence


def write_json_report(path: str | Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n")


def write_csv_series(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def read_csv_series(path: str | Path) -> tuple[list[str], list[list[float]]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(x) for x in row] for row in reader]
    return header, rows


def report_paths(output_dir: str | Path, kind: str) -> tuple[Path, Path]:
    """(json_path, csv_path) for an experiment kind inside output_dir."""
    out = Path(output_dir)
    return out / f"{kind}_report.json", out / f"{kind}_series.csv"
