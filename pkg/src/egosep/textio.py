"""Deterministic, locale-independent text output helpers.

All artifact CSV/JSON writers go through these so that identical runs
produce byte-identical files: floats use 6 significant digits (integer
values printed as integers), and files are written to a temp path in the
same directory then atomically renamed.
"""

from __future__ import annotations

import csv
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

__all__ = ["fmt_cell", "atomic_write_text", "write_csv_atomic"]


def fmt_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    f = float(x)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return format(f, ".6g")


def atomic_write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv_atomic(
    path: str | Path, header: Sequence[str], rows: Iterable[Sequence]
) -> None:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_cell(c) for c in row])
    atomic_write_text(path, buf.getvalue())
