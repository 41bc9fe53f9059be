"""Figure jobs and run-directory loading.

A run directory is the contract with the simulation package: manifest.json
(full config echo), results.csv (data points plus any fitted slope columns,
repeated per row), series.jsonl (per-sample records), and study-specific
extras.  Loading is strict: a missing file or column is an error naming
both.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field


class FigureDataError(ValueError):
    pass


@dataclass
class FigureJob:
    run_dir: str
    kind: str
    out_path: str
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        manifest = os.path.join(self.run_dir, "manifest.json")
        if not os.path.isfile(manifest):
            raise FigureDataError(f"{manifest}: manifest not found in run directory")


@dataclass
class RunData:
    run_dir: str
    manifest: dict
    manifest_sha256: str
    results: list  # rows as dicts of strings, exactly as stored
    result_columns: list
    series: list  # parsed JSONL rows

    def results_path(self) -> str:
        return os.path.join(self.run_dir, "results.csv")

    def column(self, name: str, rows=None):
        """Raw string values of a results column; errors name file and column."""
        rows = self.results if rows is None else rows
        if name not in self.result_columns:
            raise FigureDataError(
                f"{self.results_path()}: missing column {name!r}")
        values = []
        for i, row in enumerate(rows):
            value = row.get(name)
            if value is None or value == "":
                raise FigureDataError(
                    f"{self.results_path()}: ragged column {name!r} at row {i + 1}")
            values.append(value)
        return values

    def floats(self, name: str):
        try:
            return [float(v) for v in self.column(name)]
        except ValueError as exc:
            raise FigureDataError(
                f"{self.results_path()}: column {name!r}: {exc}") from exc


def load_run(run_dir: str) -> RunData:
    manifest_path = os.path.join(run_dir, "manifest.json")
    results_path = os.path.join(run_dir, "results.csv")
    series_path = os.path.join(run_dir, "series.jsonl")
    for path in (manifest_path, results_path, series_path):
        if not os.path.isfile(path):
            raise FigureDataError(f"{path}: required run file not found")

    raw_manifest = open(manifest_path, "rb").read()
    manifest = json.loads(raw_manifest)
    sha = hashlib.sha256(raw_manifest).hexdigest()

    with open(results_path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FigureDataError(f"{results_path}: empty results file")
        columns = list(reader.fieldnames)
        rows = list(reader)
    for i, row in enumerate(rows):
        if None in row or any(v is None for v in row.values()):
            raise FigureDataError(f"{results_path}: ragged row {i + 2}")

    series = []
    with open(series_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                series.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise FigureDataError(
                    f"{series_path}: line {lineno}: {exc}") from exc

    return RunData(run_dir, manifest, sha, rows, columns, series)
