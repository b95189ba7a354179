"""Reading samples from CSV and writing tables."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .empirical import Sample


class ParseError(ValueError):
    pass


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def parse_sample(text: str, source: str = "<input>") -> Sample:
    """One observation per row, numeric columns; a non-numeric first row is a header."""
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1)
            if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{source}: empty file")
    if not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{source}: header but no data rows")
    width = len(rows[0][1])
    data = []
    for lineno, row in rows:
        if len(row) != width:
            raise ParseError(f"{source}: line {lineno}: expected {width} columns, got {len(row)}")
        try:
            values = [float(c) for c in row]
        except ValueError:
            bad = next(c for c in row if not _is_number(c))
            raise ParseError(f"{source}: line {lineno}: non-numeric cell {bad.strip()!r}") from None
        if not all(np.isfinite(values)):
            raise ParseError(f"{source}: line {lineno}: non-finite value")
        data.append(values)
    return Sample(np.array(data))


def ingest(path: str | Path) -> Sample:
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"{path}: no such file")
    return parse_sample(path.read_text(), str(path))


def rows_to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def dumps_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
