"""Fault application and symptom propagation over a cluster draft.

``apply_fault`` plays a template's activation sequence onto the healthy
baseline, then runs the propagation passes that stand in for the control
plane's reaction: the simulated scheduler marks unplaceable pods Pending
with per-node reasons, unpullable images surface as ImagePullBackOff,
probe misconfigurations restart or unready their pods, exhausted quotas
block replica creation, dead node components take their node NotReady, and
finally every unreachable service leaks connection errors (and an error
rate ramp) into its dependents' telemetry.

Passes run once in a fixed order chosen so that no pass re-enables an
earlier one; the single pass is therefore already the fixpoint.  Every
effect is a deterministic function of (state, seed).
"""

from __future__ import annotations

import copy
from typing import Any, Mapping, Optional

from ..errors import ForgeError, OpsBenchError
from ..model import Snapshot
from ..tools.dispatch import broken_services
from .config import parse_cpu
from .names import name_suffix
from .patch import apply_patch
from .resolve import Resolver
from .template import FaultTemplate, InjectionRule, StateMutation

_UNSCHEDULABLE_TAINT = {
    "key": "node.kubernetes.io/unschedulable",
    "value": "",
    "effect": "NoSchedule",
}


def _resources(draft: dict) -> list[dict]:
    return draft["cluster"]["resources"]


def _find_resource(draft: dict, kind: str, namespace: str, name: str) -> Optional[dict]:
    for r in _resources(draft):
        if r["kind"] == kind and r["namespace"] == namespace and r["name"] == name:
            return r
    return None


def _find_node(draft: dict, name: str) -> Optional[dict]:
    for node in draft["cluster"]["nodes"]:
        if node["name"] == name:
            return node
    return None


def _pods(draft: dict) -> list[dict]:
    return [r for r in _resources(draft) if r["kind"] == "Pod"]


def _pod_of_service(draft: dict, service: str) -> Optional[dict]:
    for pod in _pods(draft):
        if pod.get("labels", {}).get("app") == service:
            return pod
    return None


def _selector_matches(selector: Mapping[str, str], labels: Mapping[str, str]) -> bool:
    return bool(selector) and all(labels.get(k) == v for k, v in selector.items())


def _pod_ready(pod: dict) -> bool:
    return any(
        c["type"] == "Ready" and c["status"] == "True"
        for c in pod["status"].get("conditions", [])
    )


def _set_condition(obj: dict, type_: str, status: str, reason: str, message: str) -> None:
    conditions = obj["status"].setdefault("conditions", [])
    for condition in conditions:
        if condition["type"] == type_:
            condition.update(status=status, reason=reason, message=message)
            return
    conditions.append({"type": type_, "status": status, "reason": reason, "message": message})


def _add_event(obj: dict, timestamp: int, type_: str, reason: str, message: str) -> None:
    obj.setdefault("events", []).append(
        {"timestamp": timestamp, "type": type_, "reason": reason, "message": message}
    )
    obj["events"].sort(key=lambda e: e["timestamp"])


def _append_log_lines(draft: dict, service: str, namespace: str, lines: list[dict]) -> None:
    for entry in draft["telemetry"]["logs"]:
        if entry["service"] == service and entry["namespace"] == namespace:
            entry["lines"].extend(lines)
            entry["lines"].sort(key=lambda l: l["timestamp"])
            return
    draft["telemetry"]["logs"].append(
        {"service": service, "namespace": namespace, "lines": sorted(lines, key=lambda l: l["timestamp"])}
    )


def _ramp_metric(draft: dict, entity: str, metric: str, peak: float, span: int = 12) -> None:
    """Linearly drive the series tail up (or down) to ``peak`` at the last sample."""
    for entry in draft["telemetry"]["metrics"]:
        if entry["entity"] == entity and entry["metric_name"] == metric:
            samples = entry["samples"]
            span = min(span, len(samples))
            if span == 0:
                return
            start = samples[-span][1]
            for i in range(span):
                samples[-span + i][1] = round(start + (peak - start) * (i + 1) / span, 2)
            return
    raise ForgeError(f"metric series ({entity}, {metric}) not present")


class _Engine:
    def __init__(self, base_draft: dict, seed: int):
        self.seed = seed
        base_pods = [r for r in base_draft["cluster"]["resources"] if r["kind"] == "Pod"]
        self.valid_images = {
            c["image"]
            for pod in base_pods
            for c in pod["spec"].get("containers", [])
        }
        self.known_hosts = {image.split("/")[0] for image in self.valid_images}

    # -- mutation stage ----------------------------------------------------

    def apply_mutation(self, draft: dict, mutation: StateMutation, resolver: Resolver, label: str) -> None:
        namespace = resolver.namespace()
        if mutation.op == "create":
            resource = resolver.deep(copy.deepcopy(mutation.value))
            if _find_resource(draft, resource["kind"], resource["namespace"], resource["name"]):
                raise ForgeError(f"{label}: resource already exists: {resource['name']!r}")
            _resources(draft).append(resource)
            return
        target = resolver.scalar(mutation.target)
        selector, _, arg = target.partition(":")
        arg = resolver.scalar(arg)
        if selector == "node":
            node = _find_node(draft, arg)
            if node is None:
                raise ForgeError(f"{label}: no node named {arg!r}")
            apply_patch(node, mutation.op, mutation.path, resolver.deep(mutation.value))
            self._sync_node_resource(draft, node)
            return
        if selector == "pod":
            obj = _pod_of_service(draft, arg)
            if obj is None:
                raise ForgeError(f"{label}: no pod for service {arg!r}")
        elif selector in ("deployment", "service", "replicaset", "resourcequota"):
            kind = {
                "deployment": "Deployment",
                "service": "Service",
                "replicaset": "ReplicaSet",
                "resourcequota": "ResourceQuota",
            }[selector]
            obj = _find_resource(draft, kind, namespace, arg)
            if obj is None:
                raise ForgeError(f"{label}: no {kind} named {arg!r} in {namespace!r}")
        else:
            raise ForgeError(f"{label}: unknown mutation target {target!r}")
        if mutation.op == "delete":
            _resources(draft).remove(obj)
            return
        apply_patch(obj, mutation.op, mutation.path, resolver.deep(mutation.value))

    def _sync_node_resource(self, draft: dict, node: dict) -> None:
        """Mirror node-level edits into the Node resource object."""
        if node.get("unschedulable") and not any(
            t["key"] == _UNSCHEDULABLE_TAINT["key"] for t in node["taints"]
        ):
            node["taints"].append(dict(_UNSCHEDULABLE_TAINT))
        resource = _find_resource(draft, "Node", "", node["name"])
        if resource is None:
            return
        resource["labels"] = dict(node["labels"])
        resource["spec"]["taints"] = copy.deepcopy(node["taints"])
        if node.get("unschedulable"):
            resource["spec"]["unschedulable"] = True
        resource["status"]["conditions"] = copy.deepcopy(node["conditions"])

    def apply_injection(self, draft: dict, rule: InjectionRule, resolver: Resolver, label: str) -> None:
        params = resolver.deep(dict(rule.params))
        if rule.kind == "component_kill":
            node = _find_node(draft, params["node"])
            if node is None:
                raise ForgeError(f"{label}: no node named {params['node']!r}")
            component = params["component"]
            status = node["components"].get(component)
            if status is None:
                raise ForgeError(f"{label}: node has no component {component!r}")
            status["process_state"] = "dead"
            status["runtime_state"] = "inactive (dead)"
            status["recent_log"] = [
                f"{component}.service: Main process exited, code=killed, status=9/KILL",
                f"{component}.service: Failed with result 'signal'.",
                f"{component}.service: Deactivated successfully.",
            ]
            return
        if rule.kind == "cpu_stress":
            service = params["service"]
            namespace = resolver.namespace()
            _ramp_metric(
                draft,
                service,
                "cpu_usage_millicores",
                float(params["peak"]),
                int(params.get("samples", 20)),
            )
            freeze = draft["freeze_time"]
            _append_log_lines(
                draft,
                service,
                namespace,
                [
                    {
                        "timestamp": freeze - 210 + 50 * i,
                        "level": "ERROR",
                        "message": f"request timed out after 2000ms (worker pool saturated, "
                        f"queue depth {40 + 7 * i})",
                    }
                    for i in range(4)
                ],
            )
            return
        if rule.kind == "metric_ramp":
            _ramp_metric(
                draft,
                params["entity"],
                params["metric"],
                float(params["peak"]),
                int(params.get("samples", 12)),
            )
            return
        raise ForgeError(f"{label}: unknown injection kind {rule.kind!r}")

    # -- propagation passes --------------------------------------------------

    def run(self, draft: dict) -> None:
        self._schedule_pending_pods(draft)
        self._image_pull(draft)
        self._probes(draft)
        self._quota(draft)
        self._dead_components(draft)
        self._workload_status(draft)

    def _node_rejection(self, draft: dict, node: dict, pod: dict) -> Optional[str]:
        taints = node.get("taints", [])
        tolerated = {t.get("key") for t in pod["spec"].get("tolerations", [])}
        if any(t["key"] == _UNSCHEDULABLE_TAINT["key"] for t in taints):
            return "node(s) were unschedulable"
        for taint in taints:
            if taint["effect"] in ("NoSchedule", "NoExecute") and taint["key"] not in tolerated:
                return (
                    f"node(s) had untolerated taint {{{taint['key']}: {taint['value']}}}"
                )
        selector = pod["spec"].get("nodeSelector") or {}
        if selector and not all(node["labels"].get(k) == v for k, v in selector.items()):
            return "node(s) didn't match Pod's node selector"
        requested = sum(
            parse_cpu(c.get("resources", {}).get("requests", {}).get("cpu", "0m"))
            for c in pod["spec"].get("containers", [])
        )
        committed = 0
        for other in _pods(draft):
            if other["spec"].get("nodeName") == node["name"]:
                committed += sum(
                    parse_cpu(c.get("resources", {}).get("requests", {}).get("cpu", "0m"))
                    for c in other["spec"].get("containers", [])
                )
        if requested + committed > node["allocatable"]["cpu_millicores"]:
            return "Insufficient cpu"
        return None

    def _schedule_pending_pods(self, draft: dict) -> None:
        nodes = draft["cluster"]["nodes"]
        freeze = draft["freeze_time"]
        for pod in _pods(draft):
            if pod["spec"].get("nodeName"):
                continue
            reasons: list[str] = []
            placed = False
            for node in nodes:
                rejection = self._node_rejection(draft, node, pod)
                if rejection is None:
                    pod["spec"]["nodeName"] = node["name"]
                    placed = True
                    break
                reasons.append(rejection)
            if placed:
                continue
            counts: dict[str, int] = {}
            for reason in reasons:
                counts[reason] = counts.get(reason, 0) + 1
            summary = ", ".join(f"{n} {reason}" for reason, n in sorted(counts.items()))
            total = len(nodes)
            message = (
                f"0/{total} nodes are available: {summary}. "
                f"preemption: 0/{total} nodes are available: "
                f"{total} Preemption is not helpful for scheduling."
            )
            pod["status"]["phase"] = "Pending"
            pod["status"]["conditions"] = [
                {
                    "type": "PodScheduled",
                    "status": "False",
                    "reason": "Unschedulable",
                    "message": message,
                },
                {"type": "Ready", "status": "False", "reason": "Unschedulable", "message": ""},
            ]
            _add_event(pod, freeze - 280, "Warning", "FailedScheduling", message)

    def _image_pull(self, draft: dict) -> None:
        freeze = draft["freeze_time"]
        for pod in _pods(draft):
            containers = pod["spec"].get("containers", [])
            if not containers:
                continue
            image = containers[0].get("image", "")
            if image in self.valid_images or not pod["spec"].get("nodeName"):
                continue
            host = image.split("/")[0]
            if host not in self.known_hosts:
                failure = (
                    f'Failed to pull image "{image}": rpc error: code = Unknown desc = '
                    f'failed to resolve reference "{image}": failed to do request: '
                    f'Head "https://{host}/v2/": dial tcp: lookup {host} on 10.96.0.10:53: '
                    f"no such host"
                )
            else:
                failure = (
                    f'Failed to pull image "{image}": rpc error: code = NotFound desc = '
                    f'failed to pull and unpack image "{image}": failed to resolve '
                    f'reference "{image}": {image}: not found'
                )
            pod["status"]["phase"] = "ImagePullBackOff"
            pod["status"]["conditions"] = [
                {"type": "PodScheduled", "status": "True", "reason": "", "message": ""},
                {"type": "Initialized", "status": "True", "reason": "", "message": ""},
                {
                    "type": "ContainersReady",
                    "status": "False",
                    "reason": "ContainersNotReady",
                    "message": f"containers with unready status: [{containers[0]['name']}]",
                },
                {
                    "type": "Ready",
                    "status": "False",
                    "reason": "ContainersNotReady",
                    "message": f"containers with unready status: [{containers[0]['name']}]",
                },
            ]
            _add_event(pod, freeze - 240, "Warning", "Failed", failure)
            _add_event(
                pod, freeze - 230, "Normal", "BackOff", f'Back-off pulling image "{image}"'
            )
            _add_event(pod, freeze - 225, "Warning", "Failed", "Error: ImagePullBackOff")

    def _probes(self, draft: dict) -> None:
        freeze = draft["freeze_time"]
        for pod in _pods(draft):
            containers = pod["spec"].get("containers", [])
            if not containers:
                continue
            container = containers[0]
            declared = {
                p.get("containerPort")
                for p in container.get("ports", [])
                if isinstance(p.get("containerPort"), int)
            }
            pod_ip = pod["spec"].get("podIP", "10.244.0.0")
            name = container.get("name", "app")

            liveness = ((container.get("livenessProbe") or {}).get("tcpSocket") or {}).get("port")
            if isinstance(liveness, int) and liveness not in declared:
                pod["status"]["restart_count"] = 4
                pod["status"]["phase"] = "Running"
                self._mark_unready(pod, name)
                for i, offset in enumerate((300, 180, 60)):
                    _add_event(
                        pod,
                        freeze - offset,
                        "Warning",
                        "Unhealthy",
                        f"Liveness probe failed: dial tcp {pod_ip}:{liveness}: "
                        f"connect: connection refused",
                    )
                _add_event(
                    pod,
                    freeze - 55,
                    "Normal",
                    "Killing",
                    f"Container {name} failed liveness probe, will be restarted",
                )
                continue

            readiness = ((container.get("readinessProbe") or {}).get("tcpSocket") or {}).get("port")
            if isinstance(readiness, int) and readiness not in declared:
                pod["status"]["phase"] = "Running"
                self._mark_unready(pod, name)
                for offset in (320, 200, 80):
                    _add_event(
                        pod,
                        freeze - offset,
                        "Warning",
                        "Unhealthy",
                        f"Readiness probe failed: dial tcp {pod_ip}:{readiness}: "
                        f"connect: connection refused",
                    )

    @staticmethod
    def _mark_unready(pod: dict, container_name: str) -> None:
        message = f"containers with unready status: [{container_name}]"
        pod["status"]["conditions"] = [
            {"type": "PodScheduled", "status": "True", "reason": "", "message": ""},
            {"type": "Initialized", "status": "True", "reason": "", "message": ""},
            {
                "type": "ContainersReady",
                "status": "False",
                "reason": "ContainersNotReady",
                "message": message,
            },
            {
                "type": "Ready",
                "status": "False",
                "reason": "ContainersNotReady",
                "message": message,
            },
        ]

    def _quota(self, draft: dict) -> None:
        freeze = draft["freeze_time"]
        quotas = [r for r in _resources(draft) if r["kind"] == "ResourceQuota"]
        for quota in quotas:
            hard = (quota.get("spec") or {}).get("hard", {})
            pod_limit = hard.get("pods")
            if not isinstance(pod_limit, int):
                continue
            namespace = quota["namespace"]
            pod_count = sum(1 for p in _pods(draft) if p["namespace"] == namespace)
            for rs in _resources(draft):
                if rs["kind"] != "ReplicaSet" or rs["namespace"] != namespace:
                    continue
                selector = (rs.get("spec") or {}).get("selector", {}).get("matchLabels", {})
                matching = [
                    p
                    for p in _pods(draft)
                    if p["namespace"] == namespace
                    and _selector_matches(selector, p.get("labels", {}))
                ]
                desired = (rs.get("spec") or {}).get("replicas", 1)
                if len(matching) >= desired or pod_count < pod_limit:
                    continue
                attempted = f"{rs['name']}-{name_suffix(self.seed, rs['name'], 'attempt')}"
                message = (
                    f'Error creating: pods "{attempted}" is forbidden: exceeded quota: '
                    f"{quota['name']}, requested: pods=1, used: pods={pod_count}, "
                    f"limited: pods={pod_limit}"
                )
                _add_event(rs, freeze - 260, "Warning", "FailedCreate", message)
                app = selector.get("app")
                deployment = (
                    _find_resource(draft, "Deployment", namespace, app) if app else None
                )
                if deployment is not None:
                    _set_condition(deployment, "ReplicaFailure", "True", "FailedCreate", message)
                    _add_event(deployment, freeze - 255, "Warning", "ReplicaFailure", message)

    def _dead_components(self, draft: dict) -> None:
        freeze = draft["freeze_time"]
        for node in draft["cluster"]["nodes"]:
            dead = {
                name
                for name, status in node["components"].items()
                if status["process_state"] == "dead"
            }
            if not dead & {"kubelet", "containerd"}:
                continue
            reason = "kubelet" if "kubelet" in dead else "containerd"
            message = (
                "Kubelet stopped posting node status."
                if reason == "kubelet"
                else "container runtime is down"
            )
            for condition in node["conditions"]:
                if condition["type"] == "Ready":
                    condition.update(status="Unknown", reason="NodeStatusUnknown", message=message)
            resource = _find_resource(draft, "Node", "", node["name"])
            if resource is not None:
                resource["status"]["phase"] = "NotReady"
                resource["status"]["conditions"] = copy.deepcopy(node["conditions"])
                _add_event(
                    resource,
                    freeze - 350,
                    "Warning",
                    "NodeNotReady",
                    f"Node {node['name']} status is now: NodeNotReady",
                )
            for pod in _pods(draft):
                if pod["spec"].get("nodeName") == node["name"]:
                    _set_condition(
                        pod,
                        "Ready",
                        "Unknown",
                        "NodeLost",
                        f"Node {node['name']} is unreachable",
                    )

    def _workload_status(self, draft: dict) -> None:
        for deployment in [r for r in _resources(draft) if r["kind"] == "Deployment"]:
            selector = (deployment.get("spec") or {}).get("selector", {}).get("matchLabels", {})
            replicas = (deployment.get("spec") or {}).get("replicas", 1)
            matching = [
                p
                for p in _pods(draft)
                if p["namespace"] == deployment["namespace"]
                and _selector_matches(selector, p.get("labels", {}))
            ]
            ready = sum(1 for p in matching if _pod_ready(p))
            extra = [
                c
                for c in deployment["status"].get("conditions", [])
                if c["type"] not in ("Available", "Progressing")
            ]
            if ready >= replicas:
                available = {
                    "type": "Available",
                    "status": "True",
                    "reason": "MinimumReplicasAvailable",
                    "message": "Deployment has minimum availability.",
                }
                deployment["status"]["phase"] = "Available"
            else:
                available = {
                    "type": "Available",
                    "status": "False",
                    "reason": "MinimumReplicasUnavailable",
                    "message": "Deployment does not have minimum availability.",
                }
                deployment["status"]["phase"] = "Degraded"
            progressing = {
                "type": "Progressing",
                "status": "True",
                "reason": "NewReplicaSetAvailable",
                "message": "ReplicaSet has successfully progressed.",
            }
            deployment["status"]["conditions"] = [available, progressing, *extra]

    # -- cascade stage -------------------------------------------------------

    def cascade_dependents(self, draft: dict, snapshot: Snapshot) -> None:
        """Connection failures bleed into consumers' logs and error rates."""
        freeze = draft["freeze_time"]
        edges = snapshot.cluster.topology.edges
        for service in broken_services(snapshot):
            spec = service.spec if isinstance(service.spec, dict) else {}
            ports = spec.get("ports") or []
            port = ports[0].get("port") if ports else 0
            fqdn = f"{service.name}.{service.namespace}.svc.cluster.local:{port}"
            dependents = sorted(d for d, deps in edges.items() if service.name in deps)
            for dependent in dependents:
                _append_log_lines(
                    draft,
                    dependent,
                    service.namespace,
                    [
                        {
                            "timestamp": freeze - 150,
                            "level": "ERROR",
                            "message": f"grpc: dial tcp {fqdn}: connect: connection refused",
                        },
                        {
                            "timestamp": freeze - 100,
                            "level": "ERROR",
                            "message": f"request to {service.name} failed: rpc error: "
                            f"code = Unavailable desc = connection error",
                        },
                        {
                            "timestamp": freeze - 50,
                            "level": "WARN",
                            "message": f"upstream {service.name} unreachable, "
                            f"retry budget exhausted",
                        },
                    ],
                )
                _ramp_metric(draft, dependent, "error_rate_percent", 12.0)


def apply_fault(base: Snapshot, template: FaultTemplate, seed: int) -> Snapshot:
    """Play the template onto the baseline and propagate its symptoms."""
    from ..model import CaseMeta  # local import keeps module load order simple
    from ..taxonomy import CATEGORY_DIFFICULTY

    draft = base.to_dict()
    engine = _Engine(draft, seed)
    resolver = Resolver(template.params, draft, seed)

    for label, operation in template.steps_in_order():
        stage = f"apply_fault[{template.template_id}:{label}]"
        try:
            if isinstance(operation, InjectionRule):
                engine.apply_injection(draft, operation, resolver, stage)
            else:
                engine.apply_mutation(draft, operation, resolver, stage)
        except ForgeError:
            raise
        except OpsBenchError as exc:
            raise ForgeError(f"{stage}: {exc}") from exc

    engine.run(draft)

    case_id = f"{template.template_id}-s{seed}"
    draft["snapshot_id"] = case_id
    draft["case_meta"] = {
        "case_id": case_id,
        "category": template.category.value,
        "root_cause_type": template.root_cause_type.value,
        "difficulty": template.difficulty.value,
        "seed": seed,
    }

    candidate = Snapshot.from_dict(draft, path=f"apply_fault[{template.template_id}]")
    engine.cascade_dependents(draft, candidate)

    if template.alert_spec:
        spec = resolver.deep(dict(template.alert_spec))
        _ramp_metric(
            draft,
            spec["entity"],
            spec["metric"],
            float(spec["peak"]),
            int(spec.get("samples", 12)),
        )

    return Snapshot.from_dict(draft, path=f"apply_fault[{template.template_id}]")
