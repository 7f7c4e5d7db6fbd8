"""CSV/JSON emission.

CSV files start with a ``#`` comment block echoing the config hash, seed and
RNG derivation, followed by one header row. Floats use Python's shortest
round-trip repr so values re-parse to the same doubles; line endings are LF.
"""

from __future__ import annotations

import io
import json
import math
import sys
from contextlib import contextmanager
from pathlib import Path

from .. import __version__


def fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float) or hasattr(v, "dtype"):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(v)


def render_csv(header, rows, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# gasloc {__version__}\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}: {v}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


@contextmanager
def _sink(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        p = Path(path)
        if p.parent and not p.parent.exists():
            p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def write_csv(path, header, rows, meta: dict | None = None) -> None:
    text = render_csv(header, rows, meta)
    with _sink(path) as fh:
        fh.write(text)


def write_json(path, payload: dict) -> None:
    with _sink(path) as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def read_csv(path_or_text):
    """Parse a file written by ``write_csv``: returns (meta, header, rows of str)."""
    text = path_or_text
    if "\n" not in str(path_or_text):
        text = Path(path_or_text).read_text(encoding="utf-8")
    meta, header, rows = {}, None, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(": ")
            if val:
                meta[key] = val
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append(line.split(","))
    return meta, header, rows


def summary_path(csv_path) -> Path | None:
    """Companion JSON path for a CSV output (None when writing to stdout)."""
    if csv_path is None or str(csv_path) == "-":
        return None
    p = Path(csv_path)
    return p.with_name(p.stem + ".summary.json")
