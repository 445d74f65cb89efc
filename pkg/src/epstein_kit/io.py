"""Small output helpers: atomic writes and CSV formatting."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def fmt(v):
    """Full-precision decimal text for a number."""
    if isinstance(v, (bool,)):
        return str(int(v))
    if isinstance(v, (int, str, np.integer)):
        return str(v)
    return repr(float(v))


def csv_text(header, rows, comment=True):
    lines = [f"# epstein-kit {__version__}"] if comment else []
    lines.append(",".join(header))
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_csv(path, header, rows):
    atomic_write_text(path, csv_text(header, rows))
