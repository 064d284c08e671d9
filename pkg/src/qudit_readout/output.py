"""CSV/JSON emission with a run manifest, and reading tables back."""

import csv
import hashlib
import io
import json
import math
import numbers
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMATS = ("csv", "json", "both")


@dataclass(frozen=True)
class Table:
    """Rows under a fixed column order."""

    columns: tuple
    rows: list


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, str):
        return value
    return "%.12g" % float(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, str) or value is None:
        return value
    if isinstance(value, numbers.Integral):
        return int(value)
    value = float(_fmt(value))
    return None if math.isnan(value) or math.isinf(value) else value


def to_json_safe(obj):
    """Round floats to 12 significant digits and map NaN/inf to null."""
    if isinstance(obj, dict):
        return {str(k): to_json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json_safe(v) for v in obj]
    if hasattr(obj, "tolist"):
        return to_json_safe(obj.tolist())
    return _json_value(obj)


def table_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        if len(row) != len(table.columns):
            raise ValueError(f"row has {len(row)} values, expected {len(table.columns)}")
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def table_json(table: Table) -> str:
    doc = {"columns": list(table.columns),
           "rows": [[_json_value(v) for v in row] for row in table.rows]}
    return json.dumps(doc, indent=1) + "\n"


def _write(path: Path, text: str) -> str:
    path.write_text(text)
    return hashlib.sha256(text.encode()).hexdigest()


def emit(results: dict, out_dir, fmt: str = "both", manifest: dict | None = None) -> list:
    """Write each result and a ``manifest.json`` into ``out_dir``.

    ``results`` maps a file stem to a :class:`Table` (written as CSV
    and/or JSON according to ``fmt``) or to a plain dict (always JSON).
    The manifest records ``manifest`` plus the SHA-256 of every file.
    Returns the written paths, manifest last.
    """
    if fmt not in FORMATS:
        raise ValueError(f"format must be one of {FORMATS}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written, digests = [], {}
    for stem, result in results.items():
        files = []
        if isinstance(result, Table):
            if fmt in ("csv", "both"):
                files.append((f"{stem}.csv", table_csv(result)))
            if fmt in ("json", "both"):
                files.append((f"{stem}.json", table_json(result)))
        else:
            files.append((f"{stem}.json", json.dumps(to_json_safe(result), indent=1) + "\n"))
        for name, text in files:
            digests[name] = _write(out_dir / name, text)
            written.append(out_dir / name)
    doc = dict(manifest or {})
    doc["outputs"] = digests
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    written.append(path)
    return written


def read_table(path) -> Table:
    """Load a table written by :func:`emit` (CSV or JSON); numbers come back as float."""
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        rows = [[math.nan if v is None else v for v in row] for row in doc["rows"]]
        return Table(tuple(doc["columns"]), rows)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = tuple(next(reader))
        rows = []
        for row in reader:
            parsed = []
            for v in row:
                try:
                    parsed.append(float(v))
                except ValueError:
                    parsed.append(v)
            rows.append(parsed)
    return Table(columns, rows)
