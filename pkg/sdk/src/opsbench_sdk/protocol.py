"""Agent-side protocol constants and message validation.

The wire contract (duplicated here by design; the SDK never imports the
harness): one JSON object per line, UTF-8.  Inbound: init, tool_result,
end.  Outbound: tool_call, final.
"""

from __future__ import annotations

from typing import Any

PROTOCOL_VERSION = 1

STAGES = (
    "AdmissionControl",
    "Scheduling",
    "Startup",
    "Runtime",
    "ServiceRouting",
    "Performance",
    "Infrastructure",
)


class ProtocolError(Exception):
    """The peer (or the caller) broke the episode protocol."""


def check_init(message: Any) -> dict:
    if not isinstance(message, dict) or message.get("type") != "init":
        raise ProtocolError("expected an init message")
    if message.get("protocol") != PROTOCOL_VERSION:
        raise ProtocolError(
            f"protocol version mismatch: harness speaks {message.get('protocol')!r}, "
            f"this SDK speaks {PROTOCOL_VERSION}"
        )
    alert = message.get("alert")
    if not isinstance(alert, dict) or not all(
        k in alert for k in ("title", "description", "timestamp")
    ):
        raise ProtocolError("init.alert missing or malformed")
    tools = message.get("tools")
    if not isinstance(tools, list) or not tools:
        raise ProtocolError("init.tools missing or empty")
    for tool in tools:
        if not isinstance(tool, dict) or "name" not in tool or "params" not in tool:
            raise ProtocolError("init.tools entry malformed")
    if not isinstance(message.get("case_id"), str):
        raise ProtocolError("init.case_id missing")
    if not isinstance(message.get("max_steps"), int):
        raise ProtocolError("init.max_steps missing")
    return message


def check_tool_result(message: Any, expected_id: int) -> dict:
    if not isinstance(message, dict) or message.get("type") != "tool_result":
        raise ProtocolError("expected a tool_result message")
    if message.get("id") != expected_id:
        raise ProtocolError(
            f"tool_result id mismatch: sent {expected_id}, got {message.get('id')!r}"
        )
    status = message.get("status")
    if status not in ("ok", "not_found", "invalid"):
        raise ProtocolError(f"tool_result has unknown status {status!r}")
    return message


def check_end(message: Any) -> dict:
    if not isinstance(message, dict) or message.get("type") != "end":
        raise ProtocolError("expected an end message")
    return message


def build_tool_call(call_id: int, tool: str, args: dict, thought: str | None = None) -> dict:
    if not isinstance(tool, str) or not tool:
        raise ProtocolError("tool name must be a non-empty string")
    if not isinstance(args, dict):
        raise ProtocolError("args must be a mapping")
    for key, value in args.items():
        if not isinstance(key, str) or isinstance(value, (dict, list)):
            raise ProtocolError("args must map strings to scalars")
    message: dict = {"type": "tool_call", "id": call_id, "tool": tool, "args": dict(args)}
    if thought is not None:
        message["thought"] = thought
    return message


def check_diagnosis(entry: Any, where: str) -> dict:
    if not isinstance(entry, dict):
        raise ProtocolError(f"{where}: diagnosis must be an object")
    for key in ("stage", "component", "root_cause"):
        if not isinstance(entry.get(key), str):
            raise ProtocolError(f"{where}: missing or non-string {key!r}")
    if entry["stage"] not in STAGES:
        raise ProtocolError(f"{where}: unknown stage {entry['stage']!r}")
    return {k: entry[k] for k in ("stage", "component", "root_cause")}


def build_final(diagnoses: list, thought: str | None = None) -> dict:
    if not isinstance(diagnoses, list) or not 1 <= len(diagnoses) <= 3:
        raise ProtocolError("final must carry between 1 and 3 diagnoses")
    checked = [check_diagnosis(d, f"diagnoses[{i}]") for i, d in enumerate(diagnoses)]
    message: dict = {"type": "final", "diagnoses": checked}
    if thought is not None:
        message["thought"] = thought
    return message
