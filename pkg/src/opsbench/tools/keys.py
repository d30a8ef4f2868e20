"""Invocation schema checking and canonical invocation keys.

A canonical key is the normalized encoding of a tool call (name plus
effective arguments).  Two calls with the same tool and the same effective
arguments map to the same key regardless of argument order; any difference
in effective arguments yields a different key.  Keys are what trajectory
matching and the response cache operate on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence
from urllib.parse import quote, unquote

from ..errors import ContractError
from .catalog import CATALOG, ToolSpec


@dataclass(frozen=True)
class ToolInvocation:
    tool_name: str
    args: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"tool": self.tool_name, "args": dict(self.args)}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ToolInvocation":
        return cls(tool_name=data["tool"], args=dict(data.get("args", {})))


@dataclass(frozen=True)
class Observation:
    status: str  # ok | not_found | invalid
    body: Any = None
    error_message: Optional[str] = None

    def to_dict(self) -> dict:
        return {"status": self.status, "body": self.body, "error": self.error_message}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "Observation":
        return cls(
            status=data["status"],
            body=data.get("body"),
            error_message=data.get("error"),
        )


def ok(body: Any) -> Observation:
    return Observation(status="ok", body=body)


def not_found(message: str) -> Observation:
    return Observation(status="not_found", error_message=message)


def invalid(message: str) -> Observation:
    return Observation(status="invalid", error_message=message)


@dataclass(frozen=True)
class ValidationFailure:
    reason: str  # unknown_tool | missing_param | unknown_param | wrong_type
    message: str


def _type_ok(expected: str, value: Any) -> bool:
    if expected == "string":
        return isinstance(value, str)
    if expected == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    return False


def validate(
    catalog: Sequence[ToolSpec], inv: ToolInvocation
) -> Optional[ValidationFailure]:
    """None when the call is schema-conforming, otherwise the failure.

    Failures are exactly what the invalid-action counter counts: unknown
    tools, missing required parameters, invented parameters, and values of
    the wrong semantic type.
    """
    spec = next((s for s in catalog if s.name == inv.tool_name), None)
    if spec is None:
        return ValidationFailure("unknown_tool", f"unknown tool {inv.tool_name!r}")
    for param in spec.params:
        if param.required and param.name not in inv.args:
            return ValidationFailure(
                "missing_param",
                f"{inv.tool_name}: missing required parameter {param.name!r}",
            )
    for arg_name, value in inv.args.items():
        param = spec.param(arg_name)
        if param is None:
            return ValidationFailure(
                "unknown_param",
                f"{inv.tool_name}: unknown parameter {arg_name!r}",
            )
        if not _type_ok(param.type, value):
            return ValidationFailure(
                "wrong_type",
                f"{inv.tool_name}: parameter {arg_name!r} must be {param.type}",
            )
    return None


def effective_args(spec: ToolSpec, inv: ToolInvocation) -> dict[str, Any]:
    """Supplied args minus optional ones equal to their defaults; strings trimmed."""
    out: dict[str, Any] = {}
    for name, value in inv.args.items():
        param = spec.param(name)
        if isinstance(value, str):
            value = value.strip()
        if param is not None and not param.required and value == param.default:
            continue
        out[name] = value
    return out


def canonical_key(catalog: Sequence[ToolSpec], inv: ToolInvocation) -> str:
    failure = validate(catalog, inv)
    if failure is not None:
        raise ContractError(f"canonical_key on invalid invocation: {failure.message}")
    spec = next(s for s in catalog if s.name == inv.tool_name)
    pairs = sorted(effective_args(spec, inv).items())
    encoded = "&".join(f"{quote(k, safe='')}={quote(str(v), safe='')}" for k, v in pairs)
    return f"{inv.tool_name}?{encoded}"


def decode_key(catalog: Sequence[ToolSpec], key: str) -> ToolInvocation:
    """Inverse of :func:`canonical_key` for keys produced by it."""
    if "?" not in key:
        raise ContractError(f"malformed canonical key {key!r}")
    tool_name, _, query = key.partition("?")
    spec = next((s for s in catalog if s.name == tool_name), None)
    if spec is None:
        raise ContractError(f"canonical key names unknown tool {tool_name!r}")
    args: dict[str, Any] = {}
    if query:
        for part in query.split("&"):
            if "=" not in part:
                raise ContractError(f"malformed canonical key segment {part!r}")
            raw_k, _, raw_v = part.partition("=")
            name, value = unquote(raw_k), unquote(raw_v)
            param = spec.param(name)
            if param is not None and param.type == "integer":
                args[name] = int(value)
            else:
                args[name] = value
    return ToolInvocation(tool_name=tool_name, args=args)


def try_canonical_key(inv: ToolInvocation) -> Optional[str]:
    """Key for a valid invocation against the shipped catalog, else None."""
    if validate(CATALOG, inv) is not None:
        return None
    return canonical_key(CATALOG, inv)
