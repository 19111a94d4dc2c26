"""Flat ``key = value`` documents used for instances and campaign configs.

Lists are whitespace separated. ``#`` starts a comment. Keys keep the order
they were written in, so dumping the same mapping always yields the same bytes.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable, Mapping


def format_real(x: float) -> str:
    # 17 significant digits round-trip any double exactly
    return format(float(x), ".17g")


def _format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_real(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_format_value(x) for x in v)
    return str(v)


def dumps(items: Iterable[tuple[str, Any]] | Mapping[str, Any]) -> str:
    if isinstance(items, Mapping):
        items = items.items()
    lines = []
    for key, value in items:
        if "=" in key or not key.strip():
            raise ValueError(f"bad key {key!r}")
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def loads(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def read(path: str | Path) -> dict[str, str]:
    return loads(Path(path).read_text())


def write(path: str | Path, items) -> None:
    Path(path).write_text(dumps(items), newline="\n")


def as_ints(value: str) -> list[int]:
    return [int(tok) for tok in value.split()]


def as_floats(value: str) -> list[float]:
    return [float(tok) for tok in value.split()]


def as_words(value: str) -> list[str]:
    return value.split()
