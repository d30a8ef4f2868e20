"""Agent session: handshake, tool calls, and the final answer.

A session wraps one episode.  Calls are strictly alternating (one request,
one matching reply), mirroring the harness's control loop.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from typing import Any, Optional, Protocol

from .protocol import (
    build_final,
    build_tool_call,
    check_end,
    check_init,
    check_tool_result,
    ProtocolError,
)


class Transport(Protocol):
    def read(self) -> dict: ...

    def write(self, message: dict) -> None: ...


class StdioTransport:
    """Line-delimited JSON over this process's stdin/stdout."""

    def __init__(self, stdin=None, stdout=None):
        self._in = stdin if stdin is not None else sys.stdin
        self._out = stdout if stdout is not None else sys.stdout

    def read(self) -> dict:
        line = self._in.readline()
        if not line:
            raise ProtocolError("harness closed the stream")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"harness sent malformed JSON: {exc}") from None

    def write(self, message: dict) -> None:
        self._out.write(json.dumps(message, ensure_ascii=False) + "\n")
        self._out.flush()


@dataclass(frozen=True)
class ToolResult:
    status: str  # ok | not_found | invalid
    body: Any = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class AgentSession:
    transport: Transport
    case_id: str
    alert: dict
    tools: list[dict]
    max_steps: int
    transcript: list[tuple[dict, ToolResult]] = field(default_factory=list)
    finished: bool = False
    _next_id: int = 1

    @classmethod
    def connect(cls, transport: Transport) -> "AgentSession":
        init = check_init(transport.read())
        return cls(
            transport=transport,
            case_id=init["case_id"],
            alert=dict(init["alert"]),
            tools=list(init["tools"]),
            max_steps=init["max_steps"],
        )

    @property
    def steps_used(self) -> int:
        return len(self.transcript)

    def tool_named(self, name: str) -> Optional[dict]:
        for tool in self.tools:
            if tool.get("name") == name:
                return tool
        return None

    def param_type(self, tool_name: str, param_name: str) -> str:
        tool = self.tool_named(tool_name) or {}
        for param in tool.get("params", []):
            if param.get("name") == param_name:
                return param.get("type", "string")
        return "string"

    def call_tool(self, tool: str, args: dict, thought: str | None = None) -> ToolResult:
        if self.finished:
            raise ProtocolError("session already finished")
        message = build_tool_call(self._next_id, tool, args, thought)
        self.transport.write(message)
        reply = check_tool_result(self.transport.read(), expected_id=self._next_id)
        self._next_id += 1
        result = ToolResult(
            status=reply["status"], body=reply.get("body"), error=reply.get("error")
        )
        self.transcript.append((message, result))
        return result

    def finish(self, diagnoses: list, thought: str | None = None) -> None:
        if self.finished:
            raise ProtocolError("finish called twice")
        self.transport.write(build_final(diagnoses, thought))
        check_end(self.transport.read())
        self.finished = True
