"""Deterministic text formats for paths, tracks, sequences, and reports.

Columnar files carry `# key: value` metadata lines (always including the
tool version and the producing config fingerprint), a column-name header,
and one row per index with floats printed to 17 significant digits so they
round-trip exactly.  Reports are line-delimited JSON records, one per
check, plus a human-readable table.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable

import numpy as np

from . import __version__
from .seqcore import RealSeq, SpecError

__all__ = [
    "write_columns",
    "read_columns",
    "write_path_file",
    "write_sequence",
    "read_sequence",
    "write_report_jsonl",
    "read_report_jsonl",
    "report_table",
]


def _fmt(v: float) -> str:
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(v, ".17g")


def write_columns(target: Path, index: np.ndarray, columns: dict[str, np.ndarray], meta: dict) -> None:
    """Write aligned columns keyed by index n."""
    lines = [f"# {k}: {v}" for k, v in {"tool-version": __version__, **meta}.items()]
    names = list(columns)
    lines.append("n " + " ".join(names))
    cols = [np.asarray(columns[name], dtype=float) for name in names]
    for arr in cols:
        if arr.size != index.size:
            raise SpecError("all columns must align with the index")
    for i, n in enumerate(index):
        lines.append(str(int(n)) + " " + " ".join(_fmt(float(c[i])) for c in cols))
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_columns(source: Path) -> tuple[np.ndarray, dict[str, np.ndarray], dict]:
    meta: dict = {}
    header: list[str] | None = None
    index: list[int] = []
    data: list[list[float]] = []
    for raw in Path(source).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "n":
                raise SpecError(f"{source}: expected a column header starting with 'n'")
            header = parts[1:]
            data = [[] for _ in header]
            continue
        index.append(int(parts[0]))
        for col, tok in zip(data, parts[1:]):
            col.append(float(tok))
    if header is None:
        raise SpecError(f"{source}: no column header found")
    return (
        np.asarray(index, dtype=np.int64),
        {name: np.asarray(col) for name, col in zip(header, data)},
        meta,
    )


def write_path_file(target: Path, x: RealSeq, s: RealSeq, H: RealSeq, meta: dict) -> None:
    """One row per index n: H(n), x(n), and the history sum S(n-1).

    Row n = 0 carries the initial condition; H and S are not defined there
    and are written as nan.
    """
    n_steps = len(s)
    index = np.arange(0, n_steps + 1)
    h_col = np.concatenate(([math.nan], H.values[:n_steps]))
    s_col = np.concatenate(([math.nan], s.values))
    write_columns(target, index, {"H": h_col, "x": x.values.copy(), "S": s_col}, meta)


def write_sequence(target: Path, seq: RealSeq, name: str, meta: dict) -> None:
    write_columns(target, seq.indices(), {name: seq.values.copy()}, meta)


def read_sequence(source: Path, name: str = "H") -> tuple[RealSeq, dict]:
    index, columns, meta = read_columns(source)
    if name not in columns:
        raise SpecError(f"{source}: no column named {name!r}")
    if index.size == 0:
        raise SpecError(f"{source}: empty sequence")
    start = int(index[0])
    if np.any(np.diff(index) != 1):
        raise SpecError(f"{source}: index column must be contiguous")
    return RealSeq(start, columns[name]), meta


def write_report_jsonl(target: Path, records: Iterable[dict], meta: dict) -> None:
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    head = {"record": "report-meta", "tool_version": __version__, **meta}
    lines = [json.dumps(head, sort_keys=True)]
    lines.extend(json.dumps(r, sort_keys=True) for r in records)
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_report_jsonl(source: Path) -> tuple[list[dict], dict]:
    records = []
    meta: dict = {}
    for line in Path(source).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        obj = json.loads(line)
        if obj.get("record") == "report-meta":
            meta = obj
        else:
            records.append(obj)
    return records, meta


def report_table(records: list[dict]) -> str:
    """Fixed-width human-readable verdict table."""
    header = f"{'scenario':30s} {'theorem':24s} {'verdict':13s} {'final-err':>12s} {'tol':>10s}"
    rows = [header, "-" * len(header)]
    for r in records:
        err = r["errors"][-1] if r["errors"] else float("nan")
        err_s = f"{err:.3e}" if isinstance(err, (int, float)) and math.isfinite(err) else str(err)
        rows.append(
            f"{r['scenario_id']:30s} {r['theorem_id']:24s} {r['verdict']:13s} {err_s:>12s} {r['tolerance']:>10g}"
        )
    counts: dict[str, int] = {}
    for r in records:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    summary = ", ".join(f"{k}={v}" for k, v in sorted(counts.items())) or "empty"
    rows.append("-" * len(header))
    rows.append(f"total: {len(records)} ({summary})")
    return "\n".join(rows)
