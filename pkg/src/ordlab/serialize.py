"""CSV/JSON writers with a fixed real-number format and -inf sentinels.

Reals go to CSV with 17 significant digits. A -inf value becomes an empty
cell plus a companion ``<column>_neginf`` flag column in CSV, and the string
"-inf" in JSON; NaN is never written.
"""
from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

NEG_INF = "-inf"


def fmt_real(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return ""
    return f"{x:.17g}"


def write_rows(fh, header, rows, neg_inf_cols=()) -> None:
    """Write ``rows`` (sequences aligned with ``header``) to an open text file."""
    flags = [header.index(c) for c in neg_inf_cols]
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(list(header) + [f"{header[i]}_neginf" for i in flags])
    for row in rows:
        row = list(row)
        extra = [int(isinstance(row[i], float) and row[i] == -math.inf) for i in flags]
        w.writerow([v if isinstance(v, str) else fmt_real(v) for v in row] + extra)


def write_csv(path, header, rows, neg_inf_cols=()) -> None:
    with open(path, "w", newline="") as fh:
        write_rows(fh, header, rows, neg_inf_cols)


def csv_text(header, rows, neg_inf_cols=()) -> str:
    buf = io.StringIO()
    write_rows(buf, header, rows, neg_inf_cols)
    return buf.getvalue()


def json_safe(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        obj = dataclasses.asdict(obj)
    if isinstance(obj, dict):
        return {str(k): json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, float):
        if obj == -math.inf:
            return NEG_INF
        if obj == math.inf:
            return "inf"
        if math.isnan(obj):
            return None
        return obj
    if hasattr(obj, "item"):  # numpy scalar
        return json_safe(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(json_safe(obj), indent=2, sort_keys=True) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj))


def config_hash(obj) -> str:
    blob = json.dumps(json_safe(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclasses.dataclass
class RunManifest:
    command_line: str
    config_hash: str
    seed: int
    tool_version: str
    timestamp: str


def write_manifest(out_dir, config, seed: int, argv=None) -> RunManifest:
    from . import __version__

    argv = sys.argv if argv is None else argv
    m = RunManifest(" ".join(str(a) for a in argv), config_hash(config), int(seed), __version__,
                    datetime.now(timezone.utc).isoformat(timespec="seconds"))
    write_json(Path(out_dir) / "manifest.json", m)
    return m
