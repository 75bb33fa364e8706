"""Report serialization (JSON and CSV) and the matching reader.

Every report is a dict with ``schema_version``, ``scenario``, ``config``,
``results`` and ``rows``. JSON carries all of it; CSV carries ``rows`` under
a ``# schema_version=...`` comment line, using the column order in
:data:`CSV_COLUMNS`. Floats are written with 10 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any

import numpy as np

SCHEMA_VERSION = 1
SIG_DIGITS = 10

MC_COLUMNS = (
    "scenario", "model", "seed", "stream", "n_trials", "n_detected", "n_success",
    "q_hat", "ci_low", "ci_high", "confidence", "verdict", "epsilon", "eta",
)
CSV_COLUMNS: dict[str, tuple[str, ...]] = {
    "exact": ("quantity", "value"),
    "quantum_mc": MC_COLUMNS,
    "dhv_mc": MC_COLUMNS,
    "adversarial_mc": MC_COLUMNS,
    "photonic": MC_COLUMNS,
    "noise_sweep": ("epsilon", "q_computed", "q_linear_formula", "delta"),
    "power_plan": ("p_true", "boundary", "z", "n_required", "experiments", "confidence", "fraction_violating"),
}


def round_sig(value: Any) -> Any:
    """Round floats (recursively) to 10 significant digits; other values pass through."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(f"{value:.{SIG_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): round_sig(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_sig(v) for v in value]
    return value


def make_report(scenario: str, config: dict[str, Any], results: dict[str, Any], rows: list[dict[str, Any]]) -> dict[str, Any]:
    columns = CSV_COLUMNS[scenario]
    for row in rows:
        missing = set(columns) - set(row)
        if missing:
            raise ValueError(f"row for {scenario} is missing columns {sorted(missing)}")
    return round_sig(
        {
            "schema_version": SCHEMA_VERSION,
            "scenario": scenario,
            "config": config,
            "results": results,
            "rows": [{c: row[c] for c in columns} for row in rows],
        }
    )


def _csv_cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.{SIG_DIGITS}g}"
    if value is None:
        return ""
    return str(value)


def dumps(report: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# schema_version={report['schema_version']} scenario={report['scenario']}\n")
        writer = csv.writer(buf, lineterminator="\n")
        columns = CSV_COLUMNS[report["scenario"]]
        writer.writerow(columns)
        for row in report["rows"]:
            writer.writerow([_csv_cell(row[c]) for c in columns])
        return buf.getvalue()
    raise ValueError(f"unknown report format {fmt!r}")


def write_report(report: dict[str, Any], path: str | Path, fmt: str) -> None:
    Path(path).write_text(dumps(report, fmt), encoding="utf-8")


def _parse_cell(text: str) -> Any:
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text


def loads(text: str) -> dict[str, Any]:
    """Parse a JSON or CSV report produced by :func:`dumps`."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        report = json.loads(text)
        if "schema_version" not in report:
            raise ValueError("not a report: missing schema_version")
        return report
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ValueError("CSV report must start with a '# schema_version=...' line")
    meta = dict(item.split("=", 1) for item in lines[0][2:].split())
    reader = csv.DictReader(lines[1:])
    expected = CSV_COLUMNS.get(meta.get("scenario", ""))
    if expected is None or tuple(reader.fieldnames or ()) != expected:
        raise ValueError(f"unexpected CSV columns {reader.fieldnames} for scenario {meta.get('scenario')!r}")
    return {
        "schema_version": int(meta["schema_version"]),
        "scenario": meta["scenario"],
        "rows": [{k: _parse_cell(v) for k, v in row.items()} for row in reader],
    }


def read_report(path: str | Path) -> dict[str, Any]:
    return loads(Path(path).read_text(encoding="utf-8"))
