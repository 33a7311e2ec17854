"""CSV output helpers: fixed formatting, LF endings, atomic replacement."""

from __future__ import annotations

import math
import os
import tempfile
from pathlib import Path

FLOAT_FORMAT = ".9g"


def format_value(x, fmt=FLOAT_FORMAT):
    """Format one cell.  ``fmt=None`` gives shortest round-trip text."""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x) if fmt is None else format(x, fmt)


def render_csv(header, rows, fmt=FLOAT_FORMAT) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v, fmt) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def atomic_write_text(path, text: str):
    """Write `text` to a temporary sibling file, then rename it over `path`."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_csv(path, header, rows, fmt=FLOAT_FORMAT):
    atomic_write_text(path, render_csv(header, rows, fmt))
