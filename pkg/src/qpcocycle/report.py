"""Deterministic CSV / JSON emission with a manifest per invocation."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

from . import __version__

SCHEMA = 1
DEFAULT_PRECISION = 12


def fmt_value(v: Any, precision: int = DEFAULT_PRECISION) -> Any:
    """Round floats to ``precision`` significant digits; recurse into containers."""
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, complex):
        return {"re": fmt_value(v.real, precision), "im": fmt_value(v.imag, precision)}
    if hasattr(v, "item") and not isinstance(v, (list, tuple, dict)):
        return fmt_value(v.item(), precision)
    if isinstance(v, float):
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.{precision}g}")
    if isinstance(v, dict):
        return {str(k): fmt_value(x, precision) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [fmt_value(x, precision) for x in v]
    return str(v)


def _cell(v: Any, precision: int) -> str:
    v = fmt_value(v, precision)
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.{precision}g}"
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def render_csv(rows: Iterable[dict], columns: Sequence[str], precision: int = DEFAULT_PRECISION) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c), precision) for c in columns])
    return buf.getvalue()


def render_json(payload: dict, precision: int = DEFAULT_PRECISION) -> str:
    return json.dumps(fmt_value(payload, precision), indent=2, sort_keys=False) + "\n"


def emit_report(
    command: str,
    rows: Sequence[dict],
    columns: Sequence[str],
    fmt: str,
    out_dir: str | Path,
    precision: int = DEFAULT_PRECISION,
    extra: dict | None = None,
    config_sha256: str = "",
) -> list[Path]:
    """Write ``<command>.<fmt>`` and ``manifest.json`` into ``out_dir``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be csv or json, got {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{command}.{fmt}"
        if fmt == "csv":
            body = render_csv(rows, columns, precision)
        else:
            payload = {"schema": SCHEMA, "command": command, "columns": list(columns), "rows": list(rows)}
            if extra:
                payload["extra"] = extra
            body = render_json(payload, precision)
        path.write_text(body, encoding="utf-8")
        manifest = {
            "schema": SCHEMA,
            "command": command,
            "version": __version__,
            "config_sha256": config_sha256,
            "format": fmt,
            "precision": precision,
            "files": [path.name],
            "rows": len(rows),
        }
        mpath = out / "manifest.json"
        mpath.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise OSError(f"cannot write report to {e.filename or out}: {e.strerror}") from e
    return [path, mpath]
