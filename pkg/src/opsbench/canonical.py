"""Canonical JSON encoding: one byte form per value.

Keys sorted lexicographically, compact separators, UTF-8, a single
trailing LF, shortest round-trip float repr (CPython's default), and
NaN/Inf rejected.  Identical values always serialize to identical bytes,
which is what the determinism checks compare.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import PersistenceError, SchemaError


def canonical_dumps(value: Any) -> str:
    return json.dumps(
        value, sort_keys=True, ensure_ascii=False, separators=(",", ":"), allow_nan=False
    )


def canonical_bytes(value: Any) -> bytes:
    return (canonical_dumps(value) + "\n").encode("utf-8")


def write_canonical(path: str | Path, value: Any) -> None:
    path = Path(path)
    try:
        path.write_bytes(canonical_bytes(value))
    except OSError as exc:
        raise PersistenceError(f"cannot write {path}: {exc}") from exc


def read_json(path: str | Path) -> Any:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise PersistenceError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: not valid JSON: {exc}") from exc
