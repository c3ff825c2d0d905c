"""Machine-readable run reports: a JSON key/value document plus optional CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict

Cell = Union[int, float, str, bool, None]


class Table(BaseModel):
    model_config = ConfigDict(extra="forbid")

    columns: list[str]
    rows: list[list[Cell]]


class RunReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    subcommand: str
    config: dict[str, Any]
    verdict: str
    summary: str
    implications: list[str] = []
    warnings: list[str] = []
    values: dict[str, Cell] = {}
    tables: dict[str, Table] = {}
    timings: Optional[dict[str, float]] = None


def _float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    # keep floats recognizably floats so they re-parse with the same type
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _emit(obj: Any, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "}")
    elif isinstance(obj, (list, tuple)):
        # table rows stay on one line each
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            parts: list[str] = []
            for v in obj:
                _emit(v, parts, indent, level + 1)
                parts.append(", ")
            out.append("[" + "".join(parts[:-1]) + "]")
            return
        out.append("[\n")
        for i, v in enumerate(obj):
            out.append(pad)
            _emit(v, out, indent, level + 1)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append(end + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: RunReport) -> str:
    """JSON with 17 significant digits per float; NaN and infinities become null."""
    out: list[str] = []
    _emit(report.model_dump(), out, 2, 0)
    return "".join(out) + "\n"


def loads(text: str) -> RunReport:
    return RunReport.model_validate_json(text)


def _csv_cell(v: Cell) -> str:
    if isinstance(v, float):
        return "" if not math.isfinite(v) else format(v, ".17g")
    if v is None:
        return ""
    return str(v)


def table_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def write_report(report: RunReport, fmt: str, out: Optional[Path]) -> list[Path]:
    """Write the report; returns the files written (empty when printing to stdout).

    ``kv`` writes the whole report as one JSON document.  ``csv`` writes each
    table to <stem>_<table>.csv and the remaining fields to <stem>.json.
    """
    if fmt == "kv":
        text = dumps(report)
        if out is None:
            print(text, end="")
            return []
        out.write_text(text)
        return [out]
    summary = report.model_copy(update={"tables": {}})
    if out is None:
        print(dumps(summary), end="")
        for name, table in report.tables.items():
            print(f"# {name}")
            print(table_csv(table), end="")
        return []
    written = []
    stem = out.with_suffix("")
    for name, table in report.tables.items():
        path = stem.parent / f"{stem.name}_{name}.csv"
        path.write_text(table_csv(table))
        written.append(path)
    path = stem.with_suffix(".json")
    path.write_text(dumps(summary))
    written.append(path)
    return written
