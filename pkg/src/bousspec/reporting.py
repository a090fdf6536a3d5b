"""Frozen CSV/JSON output layouts (see ``docs/schema.md``)."""

from __future__ import annotations

import csv
import io
import json
import math
import time

SCHEMA_VERSION = 1

COLUMNS = {
    "spectrum": ["n", "mu", "mu_tilde", "mu_unperturbed", "z", "winding_verified",
                 "refinement_residual"],
    "norming": ["n", "mu", "mu_tilde", "h_cn", "h_sn", "gamma", "beta", "log_tau3"],
    "verify": ["suite", "epsilon", "n", "value", "gamma", "beta", "residual",
               "bound_constant_fit"],
    "flow": ["n", "t", "mu", "z_offset"],
    "unperturbed": ["n", "z", "mu", "delta0_slope"],
    "battery": ["check", "lam_re", "lam_im", "deviation", "tolerance", "passed"],
}


def clean(value):
    """JSON-safe copy: non-finite floats become ``None``, tuples become lists."""
    if isinstance(value, dict):
        return {str(k): clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean(v) for v in value]
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def build_document(command: str, config: dict, rows: list[dict], summary: dict,
                   diagnostics: list[dict], with_metadata: bool = True) -> dict:
    cols = COLUMNS[command]
    rows = [{c: r.get(c) for c in cols} for r in rows]
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": config,
           "columns": cols, "rows": rows, "summary": summary,
           "diagnostics": diagnostics}
    if with_metadata:
        from . import __version__
        doc["metadata"] = {"created_unix": round(time.time(), 3), "version": __version__}
    return clean(doc)


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def dumps_csv(command: str, rows: list[dict]) -> str:
    cols = COLUMNS[command]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(clean(r.get(c))) for c in cols])
    return buf.getvalue()
