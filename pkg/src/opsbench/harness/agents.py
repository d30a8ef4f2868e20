"""Scripted calibration agents.

Each agent replays a known behavior so metric values are predictable in
closed form: the gold replayer scores perfectly, the guesser answers with
zero tool use, the shuffler inverts order, the repeater doubles every call,
the malformed agent prefixes schema-invalid calls, and the noisy variant
splices in valid off-path calls.  They read the case bundle's gold data,
so they are test equipment only; external agents never get bundle access.
"""

from __future__ import annotations

from ..cases import CaseBundle
from ..errors import ProtocolViolation
from ..tools import CATALOG, ToolInvocation, canonical_key, decode_key


class ScriptedAgent:
    """Message-level agent: the harness feeds receive(), drains emit()."""

    label = "scripted"

    def __init__(self):
        self._outgoing: list[dict] = []
        self._started = False

    def plan(self, init: dict) -> list[dict]:
        raise NotImplementedError

    def receive(self, message: dict) -> None:
        if message.get("type") == "init":
            self._outgoing = self.plan(message)
            self._started = True
        # tool_result and end need no reaction: plans are precomputed

    def emit(self) -> dict:
        if not self._started:
            raise ProtocolViolation("agent emitted before init")
        if not self._outgoing:
            raise ProtocolViolation("agent has nothing left to say")
        return self._outgoing.pop(0)


def _calls(invocations: list[ToolInvocation], start_id: int = 1) -> list[dict]:
    return [
        {"type": "tool_call", "id": start_id + i, "tool": inv.tool_name, "args": dict(inv.args)}
        for i, inv in enumerate(invocations)
    ]


def _final(diagnoses: list[dict]) -> dict:
    return {"type": "final", "diagnoses": diagnoses}


class GoldReplayAgent(ScriptedAgent):
    """Replays the gold trajectory in order, then answers the truth."""

    label = "oracle"

    def __init__(self, bundle: CaseBundle):
        super().__init__()
        self.bundle = bundle

    def gold_invocations(self) -> list[ToolInvocation]:
        return [
            decode_key(CATALOG, step.key)
            for step in self.bundle.ground_truth.gold_trajectory
        ]

    def plan(self, init: dict) -> list[dict]:
        truth = self.bundle.ground_truth.true_diagnosis
        return [*_calls(self.gold_invocations()), _final([truth.to_dict()])]


class ZeroToolGuesser(ScriptedAgent):
    """Answers immediately from no evidence at all."""

    label = "guesser"

    def __init__(self, bundle: CaseBundle):
        super().__init__()

    def plan(self, init: dict) -> list[dict]:
        return [
            _final(
                [{"stage": "Runtime", "component": "unknown", "root_cause": "speculation"}]
            )
        ]


class ShuffledGoldAgent(GoldReplayAgent):
    """All the right calls in exactly the wrong order."""

    label = "shuffled"

    def plan(self, init: dict) -> list[dict]:
        truth = self.bundle.ground_truth.true_diagnosis
        return [*_calls(list(reversed(self.gold_invocations()))), _final([truth.to_dict()])]


class RepeaterAgent(GoldReplayAgent):
    """Issues every gold call twice back to back."""

    label = "repeater"

    def plan(self, init: dict) -> list[dict]:
        truth = self.bundle.ground_truth.true_diagnosis
        doubled: list[ToolInvocation] = []
        for inv in self.gold_invocations():
            doubled.extend((inv, inv))
        return [*_calls(doubled), _final([truth.to_dict()])]


class MalformedAgent(GoldReplayAgent):
    """Fumbles m schema-invalid calls before behaving like the replayer."""

    label = "malformed"

    def __init__(self, bundle: CaseBundle, invalid_count: int = 3):
        super().__init__(bundle)
        self.invalid_count = invalid_count

    def plan(self, init: dict) -> list[dict]:
        bad_shapes = [
            ToolInvocation("GetAlerts", {"filter": "cpu"}),  # invented parameter
            ToolInvocation("GetMetrics", {"entity": "frontend"}),  # no such tool
            ToolInvocation("GetRecentLogs", {"service_name": "frontend"}),  # missing arg
        ]
        invalid = [bad_shapes[i % len(bad_shapes)] for i in range(self.invalid_count)]
        truth = self.bundle.ground_truth.true_diagnosis
        calls = _calls([*invalid, *self.gold_invocations()])
        return [*calls, _final([truth.to_dict()])]


class NoisyGoldAgent(GoldReplayAgent):
    """Gold calls interleaved with k valid extras disjoint from the gold set."""

    label = "noisy"

    def __init__(self, bundle: CaseBundle, extra_count: int = 2):
        super().__init__(bundle)
        self.extra_count = extra_count

    def _namespace(self) -> str:
        for step in self.bundle.ground_truth.gold_trajectory:
            args = decode_key(CATALOG, step.key).args
            if "namespace" in args:
                return str(args["namespace"])
        return "boutique"

    def plan(self, init: dict) -> list[dict]:
        namespace = self._namespace()
        gold = self.gold_invocations()
        gold_keys = {canonical_key(CATALOG, inv) for inv in gold}
        pool = [
            ToolInvocation("GetClusterConfiguration", {}),
            ToolInvocation("GetAlerts", {}),
            ToolInvocation("GetResources", {"resource_type": "pods", "namespace": namespace}),
            ToolInvocation("GetResources", {"resource_type": "services", "namespace": namespace}),
            ToolInvocation(
                "GetResources", {"resource_type": "deployments", "namespace": namespace}
            ),
            ToolInvocation("GetServiceDependencies", {"service_name": "frontend"}),
            ToolInvocation(
                "GetRecentLogs", {"service_name": "frontend", "namespace": namespace}
            ),
            ToolInvocation("GetAppYAML", {"service_name": "frontend"}),
        ]
        extras = [inv for inv in pool if canonical_key(CATALOG, inv) not in gold_keys]
        extras = extras[: self.extra_count]
        merged: list[ToolInvocation] = []
        for i, inv in enumerate(gold):
            if i < len(extras):
                merged.append(extras[i])
            merged.append(inv)
        merged.extend(extras[len(gold):])
        truth = self.bundle.ground_truth.true_diagnosis
        return [*_calls(merged), _final([truth.to_dict()])]


AGENT_KINDS = {
    "oracle": GoldReplayAgent,
    "guesser": ZeroToolGuesser,
    "shuffled": ShuffledGoldAgent,
    "repeater": RepeaterAgent,
    "malformed": MalformedAgent,
    "noisy": NoisyGoldAgent,
}


def make_scripted_agent(kind: str, bundle: CaseBundle, **kwargs) -> ScriptedAgent:
    try:
        factory = AGENT_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown scripted agent kind {kind!r}") from None
    return factory(bundle, **kwargs)
