"""Wire protocol: one JSON object per line, UTF-8, strictly alternating.

harness -> agent   init, tool_result, end
agent  -> harness  tool_call, final

An optional "thought" string rides on tool_call and final and is recorded
verbatim.  Anything that does not parse as one well-formed agent message
is a protocol violation and ends the episode as incomplete.
"""

from __future__ import annotations

from typing import Any

from ..cases import AlertNotice, Diagnosis
from ..errors import ProtocolViolation
from ..tools import Observation, ToolInvocation, catalog_to_jsonable

PROTOCOL_VERSION = 1


def init_message(case_id: str, alert: AlertNotice, max_steps: int) -> dict:
    return {
        "type": "init",
        "protocol": PROTOCOL_VERSION,
        "case_id": case_id,
        "alert": alert.to_dict(),
        "tools": catalog_to_jsonable(),
        "max_steps": max_steps,
    }


def tool_result_message(call_id: Any, observation: Observation) -> dict:
    message: dict = {"type": "tool_result", "id": call_id, "status": observation.status}
    if observation.status == "ok":
        message["body"] = observation.body
    else:
        message["error"] = observation.error_message or ""
    return message


def end_message() -> dict:
    return {"type": "end"}


def _check_thought(data: dict) -> None:
    if "thought" in data and not isinstance(data["thought"], str):
        raise ProtocolViolation("thought must be a string when present")


def parse_agent_message(data: Any) -> dict:
    """Validate an inbound agent message; returns it unchanged on success."""
    if not isinstance(data, dict):
        raise ProtocolViolation("agent message must be a JSON object")
    kind = data.get("type")
    if kind == "tool_call":
        if not isinstance(data.get("id"), int) or isinstance(data.get("id"), bool):
            raise ProtocolViolation("tool_call.id must be an integer")
        if not isinstance(data.get("tool"), str):
            raise ProtocolViolation("tool_call.tool must be a string")
        args = data.get("args", {})
        if not isinstance(args, dict):
            raise ProtocolViolation("tool_call.args must be an object")
        for key, value in args.items():
            if not isinstance(key, str):
                raise ProtocolViolation("tool_call.args keys must be strings")
            if isinstance(value, (dict, list)):
                raise ProtocolViolation("tool_call.args values must be scalars")
        _check_thought(data)
        return data
    if kind == "final":
        diagnoses = data.get("diagnoses")
        if not isinstance(diagnoses, list) or not 1 <= len(diagnoses) <= 3:
            raise ProtocolViolation("final.diagnoses must hold 1 to 3 entries")
        _check_thought(data)
        return data
    raise ProtocolViolation(f"unknown agent message type {kind!r}")


def invocation_from_call(message: dict) -> ToolInvocation:
    return ToolInvocation(tool_name=message["tool"], args=dict(message.get("args", {})))


def diagnoses_from_final(message: dict) -> tuple[Diagnosis, ...]:
    out = []
    for i, entry in enumerate(message["diagnoses"]):
        try:
            out.append(Diagnosis.from_dict(entry, f"final.diagnoses[{i}]"))
        except Exception as exc:
            raise ProtocolViolation(f"final.diagnoses[{i}]: {exc}") from None
    return tuple(out)
