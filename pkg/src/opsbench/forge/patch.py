"""JSON-pointer document edits used by fault templates.

Semantics follow RFC 6901 addressing with strict RFC 6902 behavior: ``add``
may create a new map key or insert into a list ("-" appends), ``replace``
and ``remove`` require the path to exist.  Unresolvable paths fail loudly;
a template that does not apply cleanly is a bug, not a case.
"""

from __future__ import annotations

from typing import Any

from ..errors import ForgeError


def _tokens(path: str) -> list[str]:
    if not path.startswith("/"):
        raise ForgeError(f"patch path must start with '/': {path!r}")
    return [t.replace("~1", "/").replace("~0", "~") for t in path.split("/")[1:]]


def _walk(doc: Any, tokens: list[str], path: str) -> Any:
    current = doc
    for token in tokens:
        if isinstance(current, dict):
            if token not in current:
                raise ForgeError(f"patch path not resolvable: {path!r} (missing {token!r})")
            current = current[token]
        elif isinstance(current, list):
            try:
                current = current[int(token)]
            except (ValueError, IndexError):
                raise ForgeError(f"patch path not resolvable: {path!r} (bad index {token!r})")
        else:
            raise ForgeError(f"patch path not resolvable: {path!r} (scalar at {token!r})")
    return current


def apply_patch(doc: Any, op: str, path: str, value: Any = None) -> None:
    """Apply one edit in place at ``path`` inside ``doc``."""
    tokens = _tokens(path)
    if not tokens:
        raise ForgeError("patch path must address a child, not the document root")
    parent = _walk(doc, tokens[:-1], path)
    leaf = tokens[-1]

    if isinstance(parent, dict):
        if op == "add":
            parent[leaf] = value
        elif op == "replace":
            if leaf not in parent:
                raise ForgeError(f"replace target missing: {path!r}")
            parent[leaf] = value
        elif op == "remove":
            if leaf not in parent:
                raise ForgeError(f"remove target missing: {path!r}")
            del parent[leaf]
        else:
            raise ForgeError(f"unknown patch op {op!r}")
        return

    if isinstance(parent, list):
        if op == "add":
            if leaf == "-":
                parent.append(value)
                return
            try:
                index = int(leaf)
            except ValueError:
                raise ForgeError(f"patch path not resolvable: {path!r}")
            if not 0 <= index <= len(parent):
                raise ForgeError(f"patch index out of range: {path!r}")
            parent.insert(index, value)
            return
        try:
            index = int(leaf)
            parent[index]
        except (ValueError, IndexError):
            raise ForgeError(f"patch path not resolvable: {path!r}")
        if op == "replace":
            parent[index] = value
        elif op == "remove":
            del parent[index]
        else:
            raise ForgeError(f"unknown patch op {op!r}")
        return

    raise ForgeError(f"patch path not resolvable: {path!r} (parent is scalar)")
