"""Canonical JSON and CSV writing for transcripts and reports.

Floats are rounded to 12 significant digits before serialization, keys are
sorted, and the document ends with a newline, so identical inputs always
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path


def round_floats(value, significant_digits: int = 12):
    """Recursively round every float to the given significant digits."""
    if isinstance(value, float):
        return float(f"{value:.{significant_digits}g}")
    if isinstance(value, dict):
        return {key: round_floats(item, significant_digits) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(item, significant_digits) for item in value]
    return value


def dumps_canonical(payload) -> str:
    return json.dumps(round_floats(payload), indent=2, sort_keys=True) + "\n"


def write_json(path: str | Path, payload) -> None:
    Path(path).write_text(dumps_canonical(payload), encoding="utf-8")


def write_csv(path: str | Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(round_floats(cell)) for cell in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
