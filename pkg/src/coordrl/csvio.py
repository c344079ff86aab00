"""Tiny CSV conventions shared by every file this package writes.

Each file starts with a ``# config_hash=...`` comment, then a header row,
then data rows.  Floats are written with repr so reading them back is exact.
"""

from __future__ import annotations

import csv
from pathlib import Path


def format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(path: str | Path, header: list[str], rows, config_hash: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def read_rows(path: str | Path) -> tuple[list[str], list[list[str]], str]:
    """Returns (header, rows, config_hash); comment lines may appear anywhere."""
    config_hash = ""
    header: list[str] | None = None
    rows: list[list[str]] = []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                stripped = line[1:].strip()
                if stripped.startswith("config_hash="):
                    config_hash = stripped.split("=", 1)[1]
                continue
            parsed = next(csv.reader([line]))
            if header is None:
                header = parsed
            elif parsed:
                rows.append(parsed)
    if header is None:
        raise ValueError(f"{path} has no header row")
    return header, rows, config_hash
