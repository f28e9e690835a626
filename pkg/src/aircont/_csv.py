"""CSV writing helpers with a fixed numeric format."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable, Sequence


def fmt_real(x: float) -> str:
    """Nine significant digits, the precision every CSV artifact uses."""
    return f"{float(x):.9g}"


def fmt_flag(flag: bool) -> str:
    return "1" if flag else "0"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def write_text(path: str | Path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")
