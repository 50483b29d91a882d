"""Result tables: one row per (grid point, configuration), CSV/JSON on disk.

The CSV carries a header row and stringified values; the JSON mirror embeds
the full experiment spec and any harness-level summary fields. Column
meanings are documented in docs/results-format.md. The ``wall_s`` column and
timing-derived meta fields are excluded from the determinism contract.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

FORMAT_VERSION = 1

# Columns whose values depend on wall-clock measurement.
TIMING_COLUMNS = ("wall_s",)
TIMING_META_KEYS = ("fitted_c", "predicted_measured_correlation")


@dataclass
class ResultTable:
    meta: dict
    rows: list[dict] = field(default_factory=list)

    @property
    def kind(self) -> str:
        return self.meta.get("spec", {}).get("kind", "unknown")

    def columns(self) -> list[str]:
        cols: list[str] = []
        for row in self.rows:
            for key in row:
                if key not in cols:
                    cols.append(key)
        return cols

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        cols = self.columns()
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=cols)
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)
        return path

    def write_json(self, path: str | Path) -> Path:
        path = Path(path)
        payload = {"format_version": FORMAT_VERSION, "meta": self.meta, "rows": self.rows}
        with path.open("w") as fh:
            json.dump(payload, fh, indent=2, default=_json_default)
            fh.write("\n")
        return path

    def write(self, stem: str | Path) -> tuple[Path, Path]:
        """Write both the CSV and its JSON mirror next to each other."""
        stem = Path(stem)
        return (
            self.write_csv(stem.with_suffix(".csv")),
            self.write_json(stem.with_suffix(".json")),
        )

    def stripped(self) -> "ResultTable":
        """Copy without wall-clock columns, for determinism comparisons."""
        rows = [
            {k: v for k, v in row.items() if k not in TIMING_COLUMNS}
            for row in self.rows
        ]
        meta = {k: v for k, v in self.meta.items() if k not in TIMING_META_KEYS}
        return ResultTable(meta=meta, rows=rows)


def _json_default(obj):
    try:
        import numpy as np

        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
    except ImportError:  # pragma: no cover
        pass
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _coerce(value: str):
    if value == "":
        return None
    if value in ("True", "False"):
        return value == "True"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        return value


def read_table(path: str | Path) -> ResultTable:
    """Load a table from a .json file or a .csv with its optional mirror."""
    path = Path(path)
    if path.suffix == ".json":
        with path.open() as fh:
            payload = json.load(fh)
        return ResultTable(meta=payload.get("meta", {}), rows=payload.get("rows", []))
    mirror = path.with_suffix(".json")
    if mirror.exists():
        return read_table(mirror)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        rows = [{k: _coerce(v) for k, v in row.items()} for row in reader]
    return ResultTable(meta={}, rows=rows)
