"""CSV and JSON artifacts written by the command line runner.

Floats are written with ``repr`` so that parsing a file and writing it
again reproduces it byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable

from .engine import TrajectoryRow

TRAJECTORY_COLUMNS = ("s", "action_type", "i", "j", "cme", "m1", "c2", "c3", "c4")
CDF_COLUMNS = ("lambda", "fraction")


def _fmt(x) -> str:
    if x is None:
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _write_csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _read_csv(text: str, header: tuple[str, ...]) -> list[list[str]]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != header:
        raise ValueError(f"expected CSV header {','.join(header)}")
    body = rows[1:]
    if any(len(r) != len(header) for r in body):
        raise ValueError("ragged CSV row")
    return body


def trajectory_csv(rows: Iterable[TrajectoryRow]) -> str:
    return _write_csv(TRAJECTORY_COLUMNS,
                      ((r.s, r.action, r.i, r.j, r.cme, r.m1, r.c2, r.c3, r.c4) for r in rows))


def parse_trajectory_csv(text: str) -> list[TrajectoryRow]:
    def opt(x: str):
        return None if x == "" else int(x)

    return [
        TrajectoryRow(int(s), a, opt(i), opt(j), *map(float, rest))
        for s, a, i, j, *rest in _read_csv(text, TRAJECTORY_COLUMNS)
    ]


def cdf_csv(steps: Iterable[tuple[float, float]]) -> str:
    return _write_csv(CDF_COLUMNS, ((float(x), float(f)) for x, f in steps))


def parse_cdf_csv(text: str) -> list[tuple[float, float]]:
    return [(float(x), float(f)) for x, f in _read_csv(text, CDF_COLUMNS)]


def dump_json(doc) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
