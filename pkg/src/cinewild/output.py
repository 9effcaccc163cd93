"""Run artefacts: the per-step metrics CSV and its JSON summary sidecar.

Both are written atomically and contain nothing that varies between
identical runs (no timestamps, no thread counts), so repeated runs produce
identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import fields
from pathlib import Path

import numpy as np

from .config import atomic_write_text
from .harness import CSV_COLUMNS, RunSummary, Scenario, StepRecord

METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"
SCENARIO_FILE = "scenario.json"

_BOOL_COLUMNS = {f.name for f in fields(StepRecord) if f.type in ("bool", bool)}
_INT_COLUMNS = {"k", "seq"}


class SchemaError(ValueError):
    """A metrics CSV that does not follow the harness column layout."""


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isnan(v):
        return "nan"
    return repr(v)


def metrics_csv_text(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([_cell(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def write_metrics_csv(records, path: str | os.PathLike) -> None:
    atomic_write_text(path, metrics_csv_text(records))


def read_metrics_csv(path: str | os.PathLike) -> dict[str, np.ndarray]:
    """Load a metrics CSV into one array per column, checking the header."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from None
    if not rows:
        raise SchemaError("empty file")
    header = tuple(rows[0])
    if header != CSV_COLUMNS:
        missing = [c for c in CSV_COLUMNS if c not in header]
        extra = [c for c in header if c not in CSV_COLUMNS]
        detail = f"missing {missing}" if missing else f"unexpected {extra}" if extra else "columns out of order"
        raise SchemaError(f"header does not match the metrics schema: {detail}")
    body = rows[1:]
    if not body:
        raise SchemaError("no data rows")
    cols: dict[str, np.ndarray] = {}
    for j, name in enumerate(CSV_COLUMNS):
        try:
            vals = [float(r[j]) for r in body]
        except (ValueError, IndexError):
            raise SchemaError(f"column {name!r} has a non-numeric or missing value") from None
        arr = np.array(vals)
        if name in _INT_COLUMNS:
            arr = arr.astype(int)
        elif name in _BOOL_COLUMNS:
            arr = arr.astype(bool)
        cols[name] = arr
    return cols


def _json_value(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def thresholds(scenario: Scenario) -> dict:
    """Reference lines for plots: zone radii, eye image size, sequence starts."""
    e = scenario.ethics
    starts, t = [], 0.0
    for s in scenario.sequences:
        starts.append(t)
        t += s.duration
    return {
        "d_ac": e.d_ac,
        "d_sf": e.d_sf,
        "d_vis": e.d_vis,
        "eye_W_px": e.eye.sensor.W_px,
        "eye_H_px": e.eye.sensor.H_px,
        "eye_c_u": e.eye.c_u,
        "f_min": scenario.limits.f_min,
        "f_max": scenario.limits.f_max,
        "sequence_starts": starts,
        "duration": t,
    }


def summary_document(summary: RunSummary, scenario: Scenario, seed: int) -> dict:
    return _json_value({
        "scenario": scenario.name,
        "mode": scenario.mode,
        "seed": int(seed),
        "dt": scenario.sim.dt,
        "sequence_labels": [s.label for s in scenario.sequences],
        "thresholds": thresholds(scenario),
        **summary.as_dict(),
    })


def write_summary(summary: RunSummary, scenario: Scenario, seed: int, path: str | os.PathLike) -> None:
    text = json.dumps(summary_document(summary, scenario, seed), indent=2, allow_nan=False) + "\n"
    atomic_write_text(path, text)


def read_summary(path: str | os.PathLike) -> dict | None:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return None


def write_json(doc, path: str | os.PathLike) -> None:
    atomic_write_text(path, json.dumps(_json_value(doc), indent=2, allow_nan=False) + "\n")

