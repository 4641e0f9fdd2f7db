"""Run reports and their canonical JSON / CSV serializations."""

import io
import json
import logging
import math
import platform
import sys
from dataclasses import asdict, dataclass, field, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import scipy

logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".16e"
INDENT = "  "
FAILING_STATUSES = ("fail", "error")


@dataclass
class RunReport:
    """Everything one configuration produced.

    ``results`` maps suite name to a JSON-shaped dict with at least ``status``;
    residual tables live under ``results[suite]["tables"][name]`` as lists of
    flat row dicts.
    """

    config: dict[str, Any]
    results: dict[str, dict[str, Any]] = field(default_factory=dict)
    versions: dict[str, str] = field(default_factory=dict)
    inconsistencies: list[str] = field(default_factory=list)
    timings: dict[str, float] | None = None

    @property
    def passed(self) -> bool:
        """No inconsistency and no suite that failed or raised."""
        return not self.inconsistencies and all(
            r.get("status") not in FAILING_STATUSES for r in self.results.values()
        )

    def status_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for result in self.results.values():
            status = result.get("status", "unknown")
            counts[status] = counts.get(status, 0) + 1
        return counts


def versions() -> dict[str, str]:
    return {
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "python": platform.python_version(),
        "scipy": scipy.__version__,
    }


def normalize(value: Any) -> Any:
    """Convert a result tree to JSON-shaped values.

    Complex numbers become {"re", "im"} objects, enums their values, numpy
    scalars and arrays plain Python values, tuples lists and NaN null.
    """
    if isinstance(value, Enum):
        return normalize(value.value)
    if is_dataclass(value) and not isinstance(value, type):
        return normalize(asdict(value))
    if isinstance(value, dict):
        return {str(k): normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [normalize(v) for v in value]
    if isinstance(value, np.ndarray):
        return normalize(value.tolist())
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"im": normalize(float(value.imag)), "re": normalize(float(value.real))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) else value
    return value


def _encode(value: Any, depth: int) -> str:
    pad = INDENT * (depth + 1)
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isinf(value):
            return "Infinity" if value > 0 else "-Infinity"
        return format(value, FLOAT_FORMAT)
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(value[k], depth + 1)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + INDENT * depth + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        items = [f"{pad}{_encode(v, depth + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + INDENT * depth + "]"
    raise TypeError(f"Cannot encode {type(value).__name__} in a report")


def to_json(report: RunReport) -> str:
    """Canonical JSON: sorted keys, two-space indent, floats with 17 significant digits."""
    body = {
        "config": report.config,
        "inconsistencies": report.inconsistencies,
        "results": report.results,
        "versions": report.versions,
    }
    if report.timings is not None:
        body["timings"] = report.timings
    return _encode(normalize(body), 0) + "\n"


def parse_report(data: str | bytes) -> RunReport:
    """Inverse of the JSON form of emit."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    body = json.loads(data)
    return RunReport(
        config=body["config"],
        results=body.get("results", {}),
        versions=body.get("versions", {}),
        inconsistencies=body.get("inconsistencies", []),
        timings=body.get("timings"),
    )


def table_frame(report: RunReport) -> pd.DataFrame:
    """One row per table row, tagged with its suite and table name."""
    rows = []
    for suite in sorted(report.results):
        tables = report.results[suite].get("tables", {})
        for name in sorted(tables):
            for row in tables[name]:
                rows.append({"suite": suite, "table": name, **normalize(row)})
    if not rows:
        return pd.DataFrame(columns=["suite", "table"])
    frame = pd.DataFrame(rows)
    # flatten {"re", "im"} cells left by complex values
    for column in list(frame.columns):
        if frame[column].map(lambda v: isinstance(v, dict)).any():
            frame[f"{column}_re"] = frame[column].map(lambda v: v["re"] if isinstance(v, dict) else None)
            frame[f"{column}_im"] = frame[column].map(lambda v: v["im"] if isinstance(v, dict) else None)
            frame = frame.drop(columns=column)
    return frame


def to_csv(report: RunReport) -> str:
    buffer = io.StringIO()
    table_frame(report).to_csv(buffer, index=False, float_format="%.16e")
    return buffer.getvalue()


def emit(report: RunReport, fmt: str = "json") -> bytes:
    """Serialize a report.

    Args:
        report: The report to serialize.
        fmt: "json" (canonical, round-trips through parse_report) or "csv"
            (residual tables only).

    Returns:
        UTF-8 encoded document.
    """
    if fmt == "json":
        return to_json(report).encode("utf-8")
    if fmt == "csv":
        return to_csv(report).encode("utf-8")
    raise ValueError(f"Unknown report format {fmt!r}")


def write_report(report: RunReport, path: Path | None, fmt: str = "json") -> None:
    """Write the report to path, or to stdout when no path is configured."""
    payload = emit(report, fmt)
    if path is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(payload)
    logger.info(f"Report saved to {path}")
