"""Episode runner, wire protocol, scripted agents, and the CLI."""

from .protocol import PROTOCOL_VERSION, end_message, init_message, parse_agent_message, tool_result_message
from .channels import AgentChannel, ChannelError, HttpChannel, InProcessChannel, SubprocessChannel
from .agents import AGENT_KINDS, make_scripted_agent
from .runner import RunConfig, run_episode, run_suite

__all__ = [
    "AGENT_KINDS",
    "AgentChannel",
    "ChannelError",
    "HttpChannel",
    "InProcessChannel",
    "PROTOCOL_VERSION",
    "RunConfig",
    "SubprocessChannel",
    "end_message",
    "init_message",
    "make_scripted_agent",
    "parse_agent_message",
    "run_episode",
    "run_suite",
    "tool_result_message",
]
