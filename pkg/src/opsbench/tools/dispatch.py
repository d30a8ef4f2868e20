"""Deterministic tool evaluation against a frozen snapshot.

``dispatch`` is a pure function of (snapshot, invocation): schema failures
come back as ``invalid``, queries naming absent entities come back as
``not_found`` with a CLI-styled error string, and everything else is
answered from the snapshot.  No call ever raises or touches state, so
repeated calls always return structurally equal observations.
"""

from __future__ import annotations

import copy
import re
from typing import Any, Optional

import yaml

from ..model import NodeInfo, ResourceObject, Snapshot
from .catalog import CATALOG
from .keys import Observation, ToolInvocation, invalid, not_found, ok, validate

# kubectl-style aliases accepted for resource_type arguments.
KIND_ALIASES = {
    "pod": "Pod", "pods": "Pod", "po": "Pod",
    "deployment": "Deployment", "deployments": "Deployment", "deploy": "Deployment",
    "service": "Service", "services": "Service", "svc": "Service",
    "node": "Node", "nodes": "Node", "no": "Node",
    "replicaset": "ReplicaSet", "replicasets": "ReplicaSet", "rs": "ReplicaSet",
    "resourcequota": "ResourceQuota", "resourcequotas": "ResourceQuota",
    "quota": "ResourceQuota",
    "persistentvolume": "PersistentVolume", "persistentvolumes": "PersistentVolume",
    "pv": "PersistentVolume",
    "persistentvolumeclaim": "PersistentVolumeClaim",
    "persistentvolumeclaims": "PersistentVolumeClaim", "pvc": "PersistentVolumeClaim",
    "serviceaccount": "ServiceAccount", "serviceaccounts": "ServiceAccount",
    "sa": "ServiceAccount",
}

PLURAL = {
    "Pod": "pods",
    "Deployment": "deployments",
    "Service": "services",
    "Node": "nodes",
    "ReplicaSet": "replicasets",
    "ResourceQuota": "resourcequotas",
    "PersistentVolume": "persistentvolumes",
    "PersistentVolumeClaim": "persistentvolumeclaims",
    "ServiceAccount": "serviceaccounts",
}

CLUSTER_SCOPED = {"Node", "PersistentVolume"}

_ERROR_KEYWORDS = re.compile(r"error|fail|exception|panic", re.IGNORECASE)
_UNSCHEDULABLE_TAINT = "node.kubernetes.io/unschedulable"


def _nf_namespace(namespace: str) -> Observation:
    return not_found(f'Error from server (NotFound): namespaces "{namespace}" not found')


def _nf_named(kind: str, name: str) -> Observation:
    plural = PLURAL.get(kind, kind.lower() + "s")
    if kind == "Deployment":
        plural = "deployments.apps"
    return not_found(f'Error from server (NotFound): {plural} "{name}" not found')


def _pod_ready(obj: ResourceObject) -> bool:
    return any(c.type == "Ready" and c.status == "True" for c in obj.status.conditions)


def _selector_matches(selector: dict, labels: dict) -> bool:
    if not selector:
        return False
    return all(labels.get(k) == v for k, v in selector.items())


def _pods_in(snapshot: Snapshot, namespace: str) -> list[ResourceObject]:
    return [
        snapshot.cluster.resources[key]
        for key in sorted(snapshot.cluster.resources)
        if key[0] == "Pod" and key[1] == namespace
    ]


def _matching_pods(snapshot: Snapshot, namespace: str, selector: Any) -> list[ResourceObject]:
    if not isinstance(selector, dict):
        return []
    return [p for p in _pods_in(snapshot, namespace) if _selector_matches(selector, dict(p.labels))]


def _container_ports(pod: ResourceObject) -> set[int]:
    ports: set[int] = set()
    spec = pod.spec if isinstance(pod.spec, dict) else {}
    for container in spec.get("containers", []) or []:
        for entry in container.get("ports", []) or []:
            value = entry.get("containerPort")
            if isinstance(value, int):
                ports.add(value)
    return ports


def service_reachability(
    snapshot: Snapshot, service: ResourceObject, port: int
) -> tuple[bool, str]:
    """Connectivity verdict modeled from declared state.

    Success requires the declared port (TCP), at least one ready pod
    matching the service selector, and a backend actually listening on the
    port's target.
    """
    fqdn = f"{service.name}.{service.namespace}.svc.cluster.local:{port}"
    spec = service.spec if isinstance(service.spec, dict) else {}
    ports = spec.get("ports", []) or []
    entry = next((p for p in ports if p.get("port") == port), None)
    if entry is None:
        return False, f"connection to {fqdn} failed: service does not expose port {port}"
    if entry.get("protocol", "TCP") != "TCP":
        return False, (
            f"connection to {fqdn} failed: service port {port} is "
            f"{entry.get('protocol')}; TCP handshake refused"
        )
    matching = _matching_pods(snapshot, service.namespace, spec.get("selector"))
    ready = [p for p in matching if _pod_ready(p)]
    if not ready:
        return False, f"connection to {fqdn} failed: no ready endpoints behind service selector"
    target = entry.get("targetPort", port)
    if not any(target in _container_ports(p) for p in ready):
        return False, (
            f"connection to {fqdn} failed: connection refused by backend "
            f"(target port {target} not open on pod)"
        )
    return True, f"TCP handshake to {fqdn} succeeded"


def broken_services(snapshot: Snapshot) -> list[ResourceObject]:
    """Services with at least one declared port that fails the reachability check."""
    out = []
    for service in snapshot.services():
        spec = service.spec if isinstance(service.spec, dict) else {}
        for entry in spec.get("ports", []) or []:
            port = entry.get("port")
            if isinstance(port, int) and not service_reachability(snapshot, service, port)[0]:
                out.append(service)
                break
    return out


def _node_status_display(node: NodeInfo) -> str:
    ready = next((c for c in node.conditions if c.type == "Ready"), None)
    display = "Ready" if ready is not None and ready.status == "True" else "NotReady"
    if any(t.key == _UNSCHEDULABLE_TAINT for t in node.taints):
        display += ",SchedulingDisabled"
    return display


def _node_roles(labels: dict) -> str:
    return "control-plane" if "node-role.kubernetes.io/control-plane" in labels else "<none>"


def _quota_usage(snapshot: Snapshot, namespace: str) -> dict[str, int]:
    pods = len(_pods_in(snapshot, namespace))
    services = sum(
        1 for key in snapshot.cluster.resources if key[0] == "Service" and key[1] == namespace
    )
    return {"pods": pods, "services": services}


def _summarize(snapshot: Snapshot, obj: ResourceObject) -> dict:
    spec = obj.spec if isinstance(obj.spec, dict) else {}
    if obj.kind == "Pod":
        return {
            "name": obj.name,
            "ready": "1/1" if _pod_ready(obj) else "0/1",
            "status": obj.status.phase,
            "restarts": obj.status.restart_count,
            "node": spec.get("nodeName", "") or "",
        }
    if obj.kind == "Deployment":
        available = 1 if obj.status.phase == "Available" else 0
        return {
            "name": obj.name,
            "ready": f"{available}/{spec.get('replicas', 1)}",
            "available": available,
        }
    if obj.kind == "ReplicaSet":
        selector = (spec.get("selector") or {}).get("matchLabels", {})
        matching = _matching_pods(snapshot, obj.namespace, selector)
        return {
            "name": obj.name,
            "desired": spec.get("replicas", 1),
            "current": len(matching),
            "ready": sum(1 for p in matching if _pod_ready(p)),
        }
    if obj.kind == "Service":
        ports = ",".join(
            f"{p.get('port')}/{p.get('protocol', 'TCP')}" for p in spec.get("ports", []) or []
        )
        return {
            "name": obj.name,
            "type": spec.get("type", "ClusterIP"),
            "cluster_ip": spec.get("clusterIP", ""),
            "ports": ports,
        }
    if obj.kind == "Node":
        node = next((n for n in snapshot.cluster.nodes if n.name == obj.name), None)
        if node is not None:
            return {
                "name": obj.name,
                "status": _node_status_display(node),
                "roles": _node_roles(dict(node.labels)),
            }
    if obj.kind == "ResourceQuota":
        hard = spec.get("hard", {}) or {}
        usage = _quota_usage(snapshot, obj.namespace)
        return {
            "name": obj.name,
            "hard": hard,
            "used": {k: usage[k] for k in sorted(hard) if k in usage},
        }
    return {"name": obj.name, "status": obj.status.phase}


def _describe(snapshot: Snapshot, obj: ResourceObject) -> dict:
    body = {
        "kind": obj.kind,
        "metadata": {"name": obj.name, "namespace": obj.namespace, "labels": dict(obj.labels)},
        "spec": copy.deepcopy(obj.spec),
        "status": obj.status.to_dict(),
        "events": [e.to_dict() for e in obj.events],
    }
    spec = obj.spec if isinstance(obj.spec, dict) else {}
    if obj.kind == "Service":
        matching = _matching_pods(snapshot, obj.namespace, spec.get("selector"))
        body["endpoints"] = sorted(p.name for p in matching if _pod_ready(p))
    if obj.kind == "ResourceQuota":
        hard = spec.get("hard", {}) or {}
        usage = _quota_usage(snapshot, obj.namespace)
        body["hard"] = hard
        body["used"] = {k: usage[k] for k in sorted(hard) if k in usage}
    return body


def _resolve_scope(
    snapshot: Snapshot, resource_type: str, namespace: str
) -> tuple[Optional[str], str, Optional[Observation]]:
    """Map a resource_type argument onto (kind, effective namespace)."""
    kind = KIND_ALIASES.get(resource_type.lower())
    if kind is None:
        return None, "", not_found(
            f'error: the server doesn\'t have a resource type "{resource_type}"'
        )
    if kind in CLUSTER_SCOPED:
        return kind, "", None  # namespace argument is ignored, as kubectl does
    if namespace not in snapshot.cluster.namespaces:
        return None, "", _nf_namespace(namespace)
    return kind, namespace, None


def _get_resources(snapshot: Snapshot, args: dict) -> Observation:
    kind, namespace, miss = _resolve_scope(snapshot, args["resource_type"], args["namespace"])
    if miss is not None:
        return miss
    name = args.get("resource_name")
    if name is not None:
        obj = snapshot.cluster.resources.get((kind, namespace, name))
        if obj is None:
            return _nf_named(kind, name)
        items = [_summarize(snapshot, obj)]
    else:
        items = [
            _summarize(snapshot, snapshot.cluster.resources[key])
            for key in sorted(snapshot.cluster.resources)
            if key[0] == kind and key[1] == namespace
        ]
    return ok({"kind": f"{kind}List", "namespace": namespace, "items": items})


def _describe_resource(snapshot: Snapshot, args: dict) -> Observation:
    kind, namespace, miss = _resolve_scope(snapshot, args["resource_type"], args["namespace"])
    if miss is not None:
        return miss
    name = args["resource_name"]
    obj = snapshot.cluster.resources.get((kind, namespace, name))
    if obj is None:
        return _nf_named(kind, name)
    return ok(_describe(snapshot, obj))


def _get_app_yaml(snapshot: Snapshot, args: dict) -> Observation:
    name = args["service_name"]
    matches = [
        snapshot.cluster.resources[key]
        for key in sorted(snapshot.cluster.resources)
        if key[0] == "Deployment" and key[2] == name
    ]
    if not matches:
        return _nf_named("Deployment", name)
    obj = matches[0]
    doc = {
        "apiVersion": "apps/v1",
        "kind": "Deployment",
        "metadata": {"name": obj.name, "namespace": obj.namespace, "labels": dict(obj.labels)},
        "spec": obj.spec,
    }
    return ok(yaml.safe_dump(doc, sort_keys=True, default_flow_style=False))


def _get_service_dependencies(snapshot: Snapshot, args: dict) -> Observation:
    name = args["service_name"]
    if name not in snapshot.cluster.topology.edges:
        return _nf_named("Service", name)
    return ok(snapshot.cluster.topology.subtree(name))


def _find_service(snapshot: Snapshot, namespace: str, name: str):
    if namespace not in snapshot.cluster.namespaces:
        return None, _nf_namespace(namespace)
    obj = snapshot.cluster.resources.get(("Service", namespace, name))
    if obj is None:
        return None, _nf_named("Service", name)
    return obj, None


def _get_recent_logs(snapshot: Snapshot, args: dict) -> Observation:
    service, miss = _find_service(snapshot, args["namespace"], args["service_name"])
    if miss is not None:
        return miss
    lines = snapshot.telemetry.logs.get((service.name, service.namespace), ())
    return ok(
        {
            "service": service.name,
            "namespace": service.namespace,
            "lines": [line.to_dict() for line in lines[-50:]],
        }
    )


def _check_connectivity(snapshot: Snapshot, args: dict) -> Observation:
    service, miss = _find_service(snapshot, args["namespace"], args["service_name"])
    if miss is not None:
        return miss
    success, detail = service_reachability(snapshot, service, args["port"])
    return ok(
        {
            "namespace": service.namespace,
            "service": service.name,
            "port": args["port"],
            "success": success,
            "detail": detail,
        }
    )


def _get_cluster_configuration(snapshot: Snapshot, args: dict) -> Observation:
    nodes = []
    for node in snapshot.cluster.nodes:
        nodes.append(
            {
                "name": node.name,
                "status": _node_status_display(node),
                "roles": _node_roles(dict(node.labels)),
                "capacity": node.capacity.to_dict(),
                "allocatable": node.allocatable.to_dict(),
                "labels": dict(node.labels),
                "taints": [t.to_dict() for t in node.taints],
                "conditions": [c.to_dict() for c in node.conditions],
            }
        )
    return ok({"nodes": nodes})


def _get_alerts(snapshot: Snapshot, args: dict) -> Observation:
    return ok({"alerts": [a.to_dict() for a in snapshot.telemetry.alerts]})


def _normalize_pattern(message: str) -> str:
    return re.sub(r"\d+", "<n>", message)


def _get_error_logs(snapshot: Snapshot, args: dict) -> Observation:
    service, miss = _find_service(snapshot, args["namespace"], args["service_name"])
    if miss is not None:
        return miss
    lines = snapshot.telemetry.logs.get((service.name, service.namespace), ())
    matched = [
        line
        for line in lines
        if line.level in ("ERROR", "FATAL") or _ERROR_KEYWORDS.search(line.message)
    ]
    groups: dict[str, list] = {}
    for line in matched:
        groups.setdefault(_normalize_pattern(line.message), []).append(line)
    patterns = [
        {"pattern": pattern, "count": len(group), "example": group[0].to_dict()}
        for pattern, group in groups.items()
    ]
    patterns.sort(key=lambda p: (-p["count"], p["pattern"]))
    return ok(
        {
            "service": service.name,
            "namespace": service.namespace,
            "total_matches": len(matched),
            "patterns": patterns,
        }
    )


def _check_node_service_status(snapshot: Snapshot, args: dict) -> Observation:
    node_name, component = args["node_name"], args["component_name"]
    node = next((n for n in snapshot.cluster.nodes if n.name == node_name), None)
    if node is None:
        return _nf_named("Node", node_name)
    status = node.components.get(component)
    if status is None:
        return not_found(
            f'Error from server (NotFound): component "{component}" not found '
            f'on node "{node_name}"'
        )
    return ok(
        {
            "node": node_name,
            "component": component,
            "process_state": status.process_state,
            "runtime_state": status.runtime_state,
            "recent_log": list(status.recent_log),
        }
    )


_HANDLERS = {
    "GetResources": _get_resources,
    "DescribeResource": _describe_resource,
    "GetAppYAML": _get_app_yaml,
    "GetServiceDependencies": _get_service_dependencies,
    "GetRecentLogs": _get_recent_logs,
    "CheckServiceConnectivity": _check_connectivity,
    "GetClusterConfiguration": _get_cluster_configuration,
    "GetAlerts": _get_alerts,
    "GetErrorLogs": _get_error_logs,
    "CheckNodeServiceStatus": _check_node_service_status,
}


def dispatch(snapshot: Snapshot, inv: ToolInvocation) -> Observation:
    failure = validate(CATALOG, inv)
    if failure is not None:
        return invalid(failure.message)
    args = {
        name: value.strip() if isinstance(value, str) else value
        for name, value in inv.args.items()
    }
    return _HANDLERS[inv.tool_name](snapshot, args)
