"""CSV ingestion and report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .dataset import Dataset, GroupMap
from .errors import DataError

REPORT_KEYS = ("channels", "method", "model", "r2", "shares", "shares_hybrid", "phi_raw",
               "beta_sign", "chosen_K", "wall_time_s", "seed")


def load_csv(path) -> Dataset:
    """Read ``revenue,<channel>,...`` with one numeric row per observation.

    Rows and columns in error messages are 1-based file positions, the
    header being row 1.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or all(not r for r in rows):
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if not header or header[0].lower() != "revenue":
        raise DataError(f"{path}: missing header; first column must be named 'revenue'")
    if len(header) < 2:
        raise DataError(f"{path}: no channel columns")
    names = header[1:]
    if any(not c for c in names):
        raise DataError(f"{path}: empty channel name in header")
    seen = set()
    for c in names:
        if c in seen:
            raise DataError(f"{path}: duplicate channel name {c}")
        seen.add(c)
    data = []
    for i, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        vals = []
        for j, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"{path}: non-numeric value {cell!r} at row {i}, column {j}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: missing or non-finite value at row {i}, column {j}")
            vals.append(v)
        data.append(vals)
    if not data:
        raise DataError(f"{path}: no data rows")
    arr = np.array(data)
    return Dataset(arr[:, 0], arr[:, 1:], tuple(names))


def write_csv(ds: Dataset, path) -> None:
    """Write a dataset so that :func:`load_csv` restores identical values."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["revenue", *ds.channel_names])
        for yi, xi in zip(ds.y, ds.X):
            w.writerow([repr(float(yi)), *(repr(float(v)) for v in xi)])


def load_group_map(path) -> GroupMap:
    """Two-column ``channel,group`` CSV (header optional)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if rows and [c.strip().lower() for c in rows[0]] == ["channel", "group"]:
        rows = rows[1:]
    pairs = []
    for i, r in enumerate(rows, start=1):
        if len(r) != 2:
            raise DataError(f"{path}: group map row {i} must have exactly two fields")
        pairs.append((r[0].strip(), r[1].strip()))
    if not pairs:
        raise DataError(f"{path}: empty group map")
    return GroupMap.from_pairs(pairs)


def write_group_map(gm: GroupMap, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["channel", "group"])
        for c, g in gm.assignments.items():
            w.writerow([c, g])


def _num(v):
    if v is None:
        return None
    v = float(v)
    return v if math.isfinite(v) else None


def report_dict(result, seed: int | None, timing: bool = False) -> dict:
    """JSON-ready report. ``wall_time_s`` is null unless ``timing`` is set,
    keeping reports byte-identical across runs."""
    return {
        "channels": list(result.channels),
        "method": result.method,
        "model": result.model,
        "r2": _num(result.r2),
        "shares": [_num(v) for v in result.share],
        "shares_hybrid": None if result.share_hybrid is None else [_num(v) for v in result.share_hybrid],
        "phi_raw": [_num(v) for v in result.phi_raw],
        "beta_sign": [int(s) for s in result.beta_sign],
        "chosen_K": result.chosen_K,
        "wall_time_s": ({k: v for k, v in result.wall_time.items()} if timing else None),
        "seed": seed,
    }


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def fmt(v, digits: int = 6) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "n/a"
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.{digits}g}"


def _sign(s: int) -> str:
    return {1: "+", -1: "-", 0: "0"}[int(s)]


def report_rows(result):
    header = ["channel", "beta_sign", "phi_raw", "share", "share_hybrid"]
    rows = []
    for j, c in enumerate(result.channels):
        h = None if result.share_hybrid is None else result.share_hybrid[j]
        rows.append([c, _sign(result.beta_sign[j]), fmt(result.phi_raw[j]), fmt(result.share[j]), fmt(h)])
    footer = [("r2", fmt(result.r2))]
    if result.model == "additive":
        footer.append(("chosen_K", fmt(result.chosen_K)))
    return header, rows, footer


def render_table(header, rows, footer=(), wall_time=None) -> str:
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    lines = ["  ".join(str(v).ljust(w) for v, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(str(v).ljust(w) for v, w in zip(r, widths)).rstrip())
    if footer or wall_time is not None:
        lines.append("")
    for k, v in footer:
        lines.append(f"{k}: {v}")
    if wall_time is not None:
        lines.append(f"wall_time: {wall_time}")
    return "\n".join(lines) + "\n"


def render_csv(header, rows, footer=(), wall_time=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    for k, v in footer:
        buf.write(f"# {k},{v}\n")
    if wall_time is not None:
        buf.write(f"# wall_time,{wall_time}\n")
    return buf.getvalue()
