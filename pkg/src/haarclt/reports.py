"""Serialization of reports and expansions.

Floats are written with 17 significant digits, which round-trips every
IEEE double exactly. JSON objects keep the declared field order.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math

import numpy as np

from .haar import HaarExpansion, from_records


def fmt(x) -> str:
    """Number formatting shared by JSON and CSV output."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = f"{x:.17g}"
    # keep integral floats recognizable as floats
    return text if any(c in text for c in ".en") else text + ".0"


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if dataclasses.is_dataclass(obj):
        obj = to_ordered_dict(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) and not dataclasses.is_dataclass(v) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    return _encode(obj, indent, 0) + "\n"


def loads(text: str):
    return json.loads(text)


def to_ordered_dict(report) -> dict:
    return {f.name: getattr(report, f.name) for f in dataclasses.fields(report)}


def expansion_to_dict(exp: HaarExpansion) -> dict:
    return {
        "M": exp.M,
        "m": exp.m,
        "dist": exp.dist_name,
        "method": exp.method,
        "sigmaM": exp.sigmaM,
        "truncation_defect": 1.0 - exp.energy,
        "clipped_variance": exp.clipped_variance,
        "coefficients": [{"j": j, "k": k, "c": c} for j, k, c in exp.records()],
        "outcomes": [float(o) for o in exp.outcomes],
    }


def expansion_from_dict(data: dict) -> HaarExpansion:
    records = [(int(r["j"]), int(r["k"]), float(r["c"])) for r in data["coefficients"]]
    return from_records(int(data["M"]), records, float(data["sigmaM"]),
                        [float(o) for o in data["outcomes"]], data.get("dist", ""),
                        data.get("method", "exact"))


def expansion_to_text(exp: HaarExpansion) -> str:
    """Plain-text export: header lines, then one ``j k c`` line per coefficient."""
    lines = [f"# M {exp.M}", f"# sigmaM {fmt(exp.sigmaM)}",
             "# outcomes " + " ".join(fmt(o) for o in exp.outcomes)]
    lines += [f"{j} {k} {fmt(c)}" for j, k, c in exp.records()]
    return "\n".join(lines) + "\n"


def expansion_from_text(text: str) -> HaarExpansion:
    M = sigma = outcomes = None
    records = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, rest = line[1:].strip().partition(" ")
            if key == "M":
                M = int(rest)
            elif key == "sigmaM":
                sigma = float(rest)
            elif key == "outcomes":
                outcomes = [float(v) for v in rest.split()]
            continue
        j, k, c = line.split()
        records.append((int(j), int(k), float(c)))
    return from_records(M, records, sigma, outcomes)


def rows_to_csv(header, rows, preamble=()) -> str:
    """CSV with optional ``#`` comment lines before the header row."""
    buf = io.StringIO()
    for line in preamble:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else ("" if v is None else fmt(v)) for v in row])
    return buf.getvalue()


def reports_to_csv(reports, preamble=()) -> str:
    """One row per dataclass report; nested dicts are flattened as ``key.sub``."""
    if not reports:
        return ""
    flat = [_flatten(to_ordered_dict(r)) for r in reports]
    header = list(flat[0])
    return rows_to_csv(header, [[row.get(h) for h in header] for row in flat], preamble)


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out
