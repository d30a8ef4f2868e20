"""Agent-author SDK for the opsbench episode protocol.

Implements the agent side of the wire protocol (line-delimited JSON),
exposes a session abstraction with tool-call and finish primitives, and
ships a rule-based reference agent runnable as ``opsbench-demo-agent``.
The SDK is dependency-free and talks to the harness only through the
protocol; it never imports the benchmark package.
"""

from .protocol import ProtocolError, PROTOCOL_VERSION, STAGES
from .session import AgentSession, StdioTransport, ToolResult
from .rule_agent import Call, Finish, Rule, RuleAgentPolicy, default_policy, replay_policy, run_rule_agent

__version__ = "0.1.0"

__all__ = [
    "AgentSession",
    "Call",
    "Finish",
    "PROTOCOL_VERSION",
    "ProtocolError",
    "Rule",
    "RuleAgentPolicy",
    "STAGES",
    "StdioTransport",
    "ToolResult",
    "default_policy",
    "replay_policy",
    "run_rule_agent",
]
