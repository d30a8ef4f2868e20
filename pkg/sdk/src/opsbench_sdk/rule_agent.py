"""Rule-based reference agent.

A policy is an ordered list of one-shot rules; each rule fires when its
trigger matches what has been observed so far and produces either the next
tool call or the final answer.  The last rule is an unconditional finish,
so every policy terminates within budget.

The default policy walks the standard triage ladder: alerts, then the pod
listing, then a describe of the anomalous object, then branch-specific
follow-ups (node inventory for scheduling problems, workload config for
image and probe problems, component probes for node loss, quota objects
for admission rejections, log summaries and connectivity checks for
routing and saturation), and finally a structured diagnosis.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Union
from urllib.parse import unquote

from .protocol import ProtocolError
from .session import AgentSession, ToolResult


@dataclass(frozen=True)
class Call:
    tool: str
    args: dict
    thought: Optional[str] = None
    save_as: Optional[str] = None  # memory key for the result body


@dataclass(frozen=True)
class Finish:
    diagnoses: list
    thought: Optional[str] = None


Action = Union[Call, Finish]


@dataclass
class Memory:
    session: AgentSession
    facts: dict = field(default_factory=dict)

    def __getitem__(self, key: str) -> Any:
        return self.facts[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.facts.get(key, default)

    def put(self, key: str, value: Any) -> None:
        self.facts[key] = value


@dataclass(frozen=True)
class Rule:
    name: str
    when: Callable[[Memory], bool]
    act: Callable[[Memory], Action]


class RuleAgentPolicy:
    def __init__(self, rules: list[Rule], fallback: Callable[[Memory], Finish]):
        self.rules = list(rules)
        self.fallback = fallback

    def run(self, session: AgentSession) -> None:
        memory = Memory(session=session)
        fired: set[str] = set()
        while True:
            if session.steps_used >= session.max_steps - 1:
                session.finish(self.fallback(memory).diagnoses)
                return
            action = self._next_action(memory, fired)
            if isinstance(action, Finish):
                session.finish(action.diagnoses, action.thought)
                return
            result = session.call_tool(action.tool, action.args, action.thought)
            if action.save_as and result.ok:
                memory.put(action.save_as, result.body)

    def _next_action(self, memory: Memory, fired: set[str]) -> Action:
        for rule in self.rules:
            if rule.name in fired:
                continue
            if rule.when(memory):
                fired.add(rule.name)
                return rule.act(memory)
        return self.fallback(memory)


def run_rule_agent(policy: RuleAgentPolicy, transport=None) -> int:
    """Main loop for a subprocess agent; returns a process exit code."""
    from .session import StdioTransport

    try:
        session = AgentSession.connect(transport or StdioTransport())
        policy.run(session)
        return 0
    except ProtocolError as exc:
        import sys

        print(f"protocol error: {exc}", file=sys.stderr)
        return 1


# --- observation parsing helpers ---------------------------------------------------


def _namespace(memory: Memory) -> str:
    match = re.search(r'namespace "([^"]+)"', memory.session.alert.get("description", ""))
    return match.group(1) if match else "default"


def _service_of_pod(pod_name: str) -> str:
    parts = pod_name.rsplit("-", 2)
    return parts[0] if len(parts) == 3 else pod_name


def _pod_items(memory: Memory) -> list[dict]:
    return (memory.get("pods") or {}).get("items", [])


def _service_names(memory: Memory) -> list[str]:
    return [item.get("name", "") for item in (memory.get("services") or {}).get("items", [])]


def _anomalous_pod(memory: Memory) -> Optional[dict]:
    for item in _pod_items(memory):
        ready = item.get("ready", "1/1")
        if item.get("status") != "Running" or ready.startswith("0") or item.get("restarts", 0) > 0:
            return item
    return None


def _events(memory: Memory) -> list[dict]:
    return (memory.get("describe") or {}).get("events", [])


def _event_messages(memory: Memory) -> list[str]:
    return [e.get("message", "") for e in _events(memory)]


def _scheduling_message(memory: Memory) -> Optional[str]:
    for event in _events(memory):
        if event.get("reason") == "FailedScheduling":
            return event.get("message", "")
    return None


def _pull_failure_message(memory: Memory) -> Optional[str]:
    for message in _event_messages(memory):
        if "Failed to pull image" in message:
            return message
    return None


def _probe_kind(memory: Memory) -> Optional[str]:
    for message in _event_messages(memory):
        if message.startswith("Liveness probe failed"):
            return "liveness"
    for message in _event_messages(memory):
        if message.startswith("Readiness probe failed"):
            return "readiness"
    return None


def _lost_node(memory: Memory) -> Optional[str]:
    for condition in (memory.get("describe") or {}).get("status", {}).get("conditions", []):
        if condition.get("type") == "Ready" and condition.get("status") == "Unknown":
            match = re.search(r"Node (\S+) is unreachable", condition.get("message", ""))
            if match:
                return match.group(1)
    return None


def _hinted_services(memory: Memory) -> list[str]:
    description = memory.session.alert.get("description", "")
    return [name for name in _service_names(memory) if name and name in description]


def _missing_pod_service(memory: Memory) -> Optional[str]:
    if _anomalous_pod(memory) is not None or not memory.get("pods"):
        return None
    pod_names = [item.get("name", "") for item in _pod_items(memory)]
    for service in _hinted_services(memory):
        if not any(name.startswith(f"{service}-") for name in pod_names):
            return service
    return None


def _alert_entities(memory: Memory, metric: str) -> list[str]:
    alerts = (memory.get("alerts") or {}).get("alerts", [])
    return [a.get("entity", "") for a in alerts if a.get("metric_name") == metric]


def _dial_target(memory: Memory) -> Optional[tuple[str, int]]:
    """Extract (service, port) from dependency dial errors in a log summary."""
    summary = memory.get("dependent_errors") or {}
    for pattern in summary.get("patterns", []):
        message = (pattern.get("example") or {}).get("message", "")
        match = re.search(r"dial tcp ([a-z0-9-]+)\.[a-z0-9-]+\.svc\.cluster\.local:(\d+)", message)
        if match:
            return match.group(1), int(match.group(2))
    return None


_QUOTA_RESOURCE_CAUSE = {
    "pods": "NamespacePodQuotaExceeded",
    "cpu": "NamespaceCPUQuotaExceeded",
    "memory": "NamespaceMemoryQuotaExceeded",
    "services": "NamespaceServiceQuotaExceeded",
}


def _quota_evidence(memory: Memory) -> Optional[tuple[str, str]]:
    """(quota name, quota cause) from a deployment's replica-failure message."""
    body = memory.get("deploy_describe") or {}
    texts = [c.get("message", "") for c in body.get("status", {}).get("conditions", [])]
    texts += [e.get("message", "") for e in body.get("events", [])]
    for text in texts:
        match = re.search(r"exceeded quota: (\S+), requested: (\w+)=", text)
        if match:
            cause = _QUOTA_RESOURCE_CAUSE.get(match.group(2), "NamespacePodQuotaExceeded")
            return match.group(1).rstrip(","), cause
    return None


def _diagnosis(stage: str, component: str, root_cause: str) -> dict:
    return {"stage": stage, "component": component, "root_cause": root_cause}


# --- the default diagnostic policy ---------------------------------------------------


def default_policy() -> RuleAgentPolicy:
    def anomalous_service(memory: Memory) -> str:
        pod = _anomalous_pod(memory)
        return _service_of_pod(pod["name"]) if pod else "unknown"

    # Branch predicates; each implies the describe step already ran.
    sched = lambda m: _scheduling_message(m) is not None
    pull = lambda m: _pull_failure_message(m) is not None
    probe = lambda m: _probe_kind(m) is not None
    lost = lambda m: _lost_node(m) is not None
    quota = lambda m: _missing_pod_service(m) is not None
    perf = lambda m: (
        memory_has_listings(m)
        and _anomalous_pod(m) is None
        and _missing_pod_service(m) is None
        and bool(_alert_entities(m, "cpu_usage_millicores"))
    )
    routing = lambda m: (
        memory_has_listings(m)
        and _anomalous_pod(m) is None
        and _missing_pod_service(m) is None
        and not _alert_entities(m, "cpu_usage_millicores")
        and bool(_alert_entities(m, "error_rate_percent"))
    )

    def memory_has_listings(memory: Memory) -> bool:
        return memory.get("pods") is not None and memory.get("services") is not None

    def finish_scheduling(memory: Memory) -> Finish:
        message = _scheduling_message(memory) or ""
        if "untolerated taint" in message:
            cause = "TaintTolerationMismatch"
        elif "were unschedulable" in message:
            cause = "NodeCordoned"
        elif "Insufficient cpu" in message:
            cause = "InsufficientNodeCPU"
        elif "Insufficient memory" in message:
            cause = "InsufficientNodeMemory"
        else:
            cause = "NodeSelectorMismatch"
        return Finish([_diagnosis("Scheduling", anomalous_service(memory), cause)])

    def finish_startup_or_runtime(memory: Memory) -> Finish:
        service = anomalous_service(memory)
        pull_message = _pull_failure_message(memory)
        if pull_message is not None:
            cause = (
                "ImageRegistryDNSFailure"
                if "no such host" in pull_message
                else "IncorrectImageReference"
            )
            return Finish([_diagnosis("Startup", service, cause)])
        if _probe_kind(memory) == "liveness":
            return Finish([
                _diagnosis("Runtime", service, "LivenessProbeIncorrectPort"),
                _diagnosis("Runtime", service, "LivenessProbeIncorrectProtocol"),
            ])
        return Finish([
            _diagnosis("Runtime", service, "ReadinessProbeIncorrectPort"),
            _diagnosis("Runtime", service, "ReadinessProbeIncorrectProtocol"),
        ])

    def dead_component(memory: Memory) -> Optional[str]:
        probe_body = memory.get("component_probe") or {}
        if probe_body.get("process_state") == "dead":
            return probe_body.get("component", "kubelet")
        return None

    def finish_infra(memory: Memory) -> Finish:
        causes = {
            "kubelet": "KubeletUnavailable",
            "containerd": "ContainerdUnavailable",
            "kube-proxy": "KubeProxyUnavailable",
            "kube-scheduler": "KubeSchedulerUnavailable",
        }
        component = dead_component(memory) or "kubelet"
        node = _lost_node(memory) or "unknown"
        return Finish([_diagnosis("Infrastructure", node, causes[component])])

    def finish_admission(memory: Memory) -> Finish:
        service = _missing_pod_service(memory) or "unknown"
        evidence = _quota_evidence(memory)
        cause = evidence[1] if evidence else "NamespacePodQuotaExceeded"
        return Finish([_diagnosis("AdmissionControl", service, cause)])

    def finish_performance(memory: Memory) -> Finish:
        entities = _alert_entities(memory, "cpu_usage_millicores")
        component = entities[0] if entities else "unknown"
        return Finish([_diagnosis("Performance", component, "PodCPUOverload")])

    def finish_routing(memory: Memory) -> Finish:
        target = _dial_target(memory)
        component = target[0] if target else "unknown"
        detail = (memory.get("connectivity") or {}).get("detail", "")
        endpoints = (memory.get("service_describe") or {}).get("endpoints")
        if "no ready endpoints" in detail or endpoints == []:
            cause = "ServiceSelectorMismatch"
        elif "target port" in detail:
            cause = "ServicePortMappingMismatch"
        elif "does not expose port" in detail or "is UDP" in detail:
            cause = "ServiceProtocolMismatch"
        else:
            cause = "ServiceSelectorMismatch"
        return Finish([_diagnosis("ServiceRouting", component, cause)])

    def fallback(memory: Memory) -> Finish:
        hinted = _hinted_services(memory)
        component = hinted[0] if hinted else "unknown"
        return Finish([_diagnosis("Runtime", component, "undetermined")])

    rules = [
        Rule("alerts", lambda m: True,
             lambda m: Call("GetAlerts", {}, save_as="alerts",
                            thought="Check fired alerts first.")),
        Rule("pods", lambda m: True,
             lambda m: Call("GetResources",
                            {"resource_type": "pods", "namespace": _namespace(m)},
                            save_as="pods",
                            thought="List workloads to spot anomalous pods.")),
        Rule("services", lambda m: True,
             lambda m: Call("GetResources",
                            {"resource_type": "services", "namespace": _namespace(m)},
                            save_as="services")),
        Rule("describe_pod", lambda m: _anomalous_pod(m) is not None,
             lambda m: Call("DescribeResource",
                            {"resource_type": "pods",
                             "resource_name": _anomalous_pod(m)["name"],
                             "namespace": _namespace(m)},
                            save_as="describe",
                            thought="Inspect the anomalous pod's state and events.")),
        # Scheduling: confirm against the node inventory.
        Rule("sched_nodes", lambda m: sched(m) and m.get("nodes") is None,
             lambda m: Call("GetClusterConfiguration", {}, save_as="nodes",
                            thought="Scheduling failed; check node taints and labels.")),
        Rule("sched_finish", lambda m: sched(m) and m.get("nodes") is not None,
             finish_scheduling),
        # Startup and probe problems: confirm against the deployment config.
        Rule("config_yaml", lambda m: (pull(m) or probe(m)) and m.get("config") is None,
             lambda m: Call("GetAppYAML", {"service_name": anomalous_service(m)},
                            save_as="config",
                            thought="Compare runtime failure against the declared config.")),
        Rule("config_finish", lambda m: (pull(m) or probe(m)) and m.get("config") is not None,
             finish_startup_or_runtime),
        # Node loss: inventory, then component liveness probes.
        Rule("node_view", lambda m: lost(m) and m.get("nodes") is None,
             lambda m: Call("GetClusterConfiguration", {}, save_as="nodes")),
        Rule("component_probe", lambda m: lost(m) and m.get("nodes") is not None,
             lambda m: Call("CheckNodeServiceStatus",
                            {"node_name": _lost_node(m), "component_name": "kubelet"},
                            save_as="component_probe",
                            thought="Node went dark; probe its control plane agents.")),
        Rule("component_probe_runtime",
             lambda m: lost(m) and m.get("component_probe") is not None
             and dead_component(m) is None,
             lambda m: Call("CheckNodeServiceStatus",
                            {"node_name": _lost_node(m), "component_name": "containerd"},
                            save_as="component_probe")),
        Rule("infra_finish", lambda m: lost(m) and dead_component(m) is not None,
             finish_infra),
        # Admission: a hinted workload has no pod at all.
        Rule("deploy_describe", lambda m: quota(m) and m.get("deploy_describe") is None,
             lambda m: Call("DescribeResource",
                            {"resource_type": "deployments",
                             "resource_name": _missing_pod_service(m),
                             "namespace": _namespace(m)},
                            save_as="deploy_describe",
                            thought="The workload lost its pod; ask the deployment why.")),
        Rule("quota_describe",
             lambda m: quota(m) and _quota_evidence(m) is not None
             and m.get("quota_describe") is None,
             lambda m: Call("DescribeResource",
                            {"resource_type": "resourcequotas",
                             "resource_name": _quota_evidence(m)[0],
                             "namespace": _namespace(m)},
                            save_as="quota_describe")),
        Rule("admission_finish",
             lambda m: quota(m) and m.get("deploy_describe") is not None
             and (_quota_evidence(m) is None or m.get("quota_describe") is not None),
             finish_admission),
        # Saturation: CPU alert without any unhealthy pod.
        Rule("perf_errors", lambda m: perf(m) and m.get("perf_errors") is None,
             lambda m: Call("GetErrorLogs",
                            {"service_name": _alert_entities(m, "cpu_usage_millicores")[0],
                             "namespace": _namespace(m)},
                            save_as="perf_errors",
                            thought="CPU is pegged; look for timeout fallout.")),
        Rule("perf_finish", lambda m: perf(m) and m.get("perf_errors") is not None,
             finish_performance),
        # Routing: dependents are erroring while every pod looks healthy.
        Rule("dependent_errors", lambda m: routing(m) and m.get("dependent_errors") is None,
             lambda m: Call("GetErrorLogs",
                            {"service_name": _alert_entities(m, "error_rate_percent")[0],
                             "namespace": _namespace(m)},
                            save_as="dependent_errors",
                            thought="Find which upstream the erroring service cannot reach.")),
        Rule("probe_connectivity",
             lambda m: routing(m) and _dial_target(m) is not None
             and m.get("connectivity") is None,
             lambda m: Call("CheckServiceConnectivity",
                            {"namespace": _namespace(m),
                             "service_name": _dial_target(m)[0],
                             "port": _dial_target(m)[1]},
                            save_as="connectivity")),
        Rule("describe_service",
             lambda m: routing(m) and m.get("connectivity") is not None
             and m.get("service_describe") is None,
             lambda m: Call("DescribeResource",
                            {"resource_type": "services",
                             "resource_name": _dial_target(m)[0],
                             "namespace": _namespace(m)},
                            save_as="service_describe",
                            thought="Check the service's selector and port mapping.")),
        Rule("routing_finish",
             lambda m: routing(m) and m.get("service_describe") is not None,
             finish_routing),
    ]
    return RuleAgentPolicy(rules, fallback)


# --- gold replay ---------------------------------------------------------------------


def _decode_key(key: str, session: AgentSession) -> Call:
    tool, _, query = key.partition("?")
    args: dict = {}
    if query:
        for part in query.split("&"):
            raw_name, _, raw_value = part.partition("=")
            name, value = unquote(raw_name), unquote(raw_value)
            if session.param_type(tool, name) == "integer":
                args[name] = int(value)
            else:
                args[name] = value
    return Call(tool, args)


def replay_policy(case_data: dict) -> RuleAgentPolicy:
    """Replay a case file's gold trajectory, then answer its true diagnosis.

    Produces episodes identical to the harness's built-in gold replayer;
    useful for calibrating custom setups end to end.
    """
    truth = case_data["ground_truth"]
    keys = [step["key"] for step in truth["gold_trajectory"]]
    final = Finish([dict(truth["true_diagnosis"])])

    rules = [
        Rule(
            f"gold_{i}",
            lambda m, need=i: len(m.session.transcript) == need,
            lambda m, k=key: _decode_key(k, m.session),
        )
        for i, key in enumerate(keys)
    ]
    rules.append(Rule("answer", lambda m: len(m.session.transcript) == len(keys),
                      lambda m: final))
    return RuleAgentPolicy(rules, fallback=lambda m: final)
