"""Healthy baseline synthesis: a running cluster with clean telemetry.

The baseline is a pure function of the config (including its seed): pods
Running and ready, no warning events, every metric comfortably inside its
threshold, and an empty alert list.  Fault templates start from here.
"""

from __future__ import annotations

import random

from ..model import Snapshot
from .config import METRIC_UNITS, BaseClusterConfig, ServiceSpec
from .names import pod_name, replicaset_name

_INFO_TEMPLATES = (
    "handled request in {ms}ms",
    "GET /healthz 200 in {ms}ms",
    "served rpc call in {ms}ms",
    "connection pool healthy ({n} idle)",
    "config sync complete in {ms}ms",
    "heartbeat ok, queue depth {n}",
)

_COMPONENT_LOG = {
    "kubelet": ("kubelet.service: watchdog ping ok", "synced pod states with api server"),
    "kube-proxy": ("kube-proxy.service: watchdog ping ok", "synced iptables rules"),
    "containerd": ("containerd.service: watchdog ping ok", "image gc completed"),
    "kube-scheduler": ("kube-scheduler.service: watchdog ping ok", "scheduling queue drained"),
}


def _default_image(config: BaseClusterConfig, spec: ServiceSpec) -> str:
    return spec.image or f"{config.registry}/boutique/{spec.name}:v1.4.2"


def _containers(config: BaseClusterConfig, spec: ServiceSpec) -> list[dict]:
    return [
        {
            "name": spec.name,
            "image": _default_image(config, spec),
            "ports": [{"containerPort": spec.port}],
            "resources": {
                "requests": {"cpu": spec.cpu_request, "memory": spec.memory_request}
            },
            "livenessProbe": {"tcpSocket": {"port": spec.port}, "periodSeconds": 10},
            "readinessProbe": {"tcpSocket": {"port": spec.port}, "periodSeconds": 10},
        }
    ]


def _true_conditions() -> list[dict]:
    return [
        {"type": "PodScheduled", "status": "True", "reason": "", "message": ""},
        {"type": "Initialized", "status": "True", "reason": "", "message": ""},
        {"type": "ContainersReady", "status": "True", "reason": "", "message": ""},
        {"type": "Ready", "status": "True", "reason": "", "message": ""},
    ]


def _pod_events(freeze: int, namespace: str, pod: str, node: str, image: str, svc: str) -> list[dict]:
    return [
        {
            "timestamp": freeze - 3600,
            "type": "Normal",
            "reason": "Scheduled",
            "message": f"Successfully assigned {namespace}/{pod} to {node}",
        },
        {
            "timestamp": freeze - 3595,
            "type": "Normal",
            "reason": "Pulled",
            "message": f'Container image "{image}" already present on machine',
        },
        {
            "timestamp": freeze - 3592,
            "type": "Normal",
            "reason": "Created",
            "message": f"Created container {svc}",
        },
        {
            "timestamp": freeze - 3590,
            "type": "Normal",
            "reason": "Started",
            "message": f"Started container {svc}",
        },
    ]


def _node_conditions() -> list[dict]:
    return [
        {
            "type": "Ready",
            "status": "True",
            "reason": "KubeletReady",
            "message": "kubelet is posting ready status",
        },
        {
            "type": "MemoryPressure",
            "status": "False",
            "reason": "KubeletHasSufficientMemory",
            "message": "kubelet has sufficient memory available",
        },
        {
            "type": "DiskPressure",
            "status": "False",
            "reason": "KubeletHasNoDiskPressure",
            "message": "kubelet has no disk pressure",
        },
    ]


def _metric_series(config: BaseClusterConfig, service: str, metric: str) -> list[list]:
    rng = random.Random(f"{config.seed}|{service}|{metric}")
    freeze = config.freeze_time
    start = freeze - config.telemetry_window_seconds
    timestamps = range(start, freeze, config.sample_interval_seconds)
    if metric == "cpu_usage_millicores":
        base = rng.uniform(70.0, 150.0)
        jitter = 18.0
    elif metric == "memory_working_set_bytes":
        base = rng.uniform(90.0, 115.0) * 2**20
        jitter = 4.0 * 2**20
    elif metric == "p99_latency_ms":
        base = rng.uniform(30.0, 80.0)
        jitter = 12.0
    else:  # error_rate_percent
        base = rng.uniform(0.1, 0.5)
        jitter = 0.2
    return [[ts, round(base + rng.uniform(-jitter, jitter), 2)] for ts in timestamps]


def _service_logs(config: BaseClusterConfig, service: str) -> list[dict]:
    rng = random.Random(f"{config.seed}|logs|{service}")
    freeze = config.freeze_time
    start = freeze - config.telemetry_window_seconds
    lines = []
    for ts in range(start, freeze, 75):
        template = rng.choice(_INFO_TEMPLATES)
        message = template.format(ms=rng.randint(2, 40), n=rng.randint(1, 16))
        lines.append({"timestamp": ts, "level": "INFO", "message": message})
    return lines


def base_draft(config: BaseClusterConfig) -> dict:
    """Plain-dict form of the healthy snapshot (the forge mutates drafts)."""
    config.validate()
    freeze = config.freeze_time
    namespace = config.namespace
    node_names = [f"node-{i}" for i in range(1, config.node_count + 1)]

    nodes = []
    node_resources = []
    for i, name in enumerate(node_names, start=1):
        labels = {"kubernetes.io/hostname": name, "kubernetes.io/os": "linux"}
        if i == 1:
            labels["node-role.kubernetes.io/control-plane"] = ""
        components = {
            comp: {
                "process_state": "active",
                "runtime_state": "active (running)",
                "recent_log": list(_COMPONENT_LOG[comp]),
            }
            for comp in _COMPONENT_LOG
        }
        nodes.append(
            {
                "name": name,
                "capacity": {
                    "cpu_millicores": config.node_cpu_millicores,
                    "memory_bytes": config.node_memory_bytes,
                    "pods": config.node_pod_capacity,
                },
                "allocatable": {
                    "cpu_millicores": config.node_allocatable_cpu_millicores,
                    "memory_bytes": config.node_allocatable_memory_bytes,
                    "pods": config.node_pod_capacity,
                },
                "labels": labels,
                "taints": [],
                "conditions": _node_conditions(),
                "components": components,
            }
        )
        node_resources.append(
            {
                "kind": "Node",
                "namespace": "",
                "name": name,
                "labels": dict(labels),
                "spec": {"podCIDR": f"10.244.{i}.0/24", "taints": []},
                "status": {"phase": "Ready", "conditions": _node_conditions(), "restart_count": 0},
                "events": [],
            }
        )

    resources: list[dict] = list(node_resources)
    ordered = sorted(config.services, key=lambda s: s.name)
    for idx, spec in enumerate(ordered):
        node = node_names[idx % len(node_names)]
        node_index = node_names.index(node) + 1
        image = _default_image(config, spec)
        pod = pod_name(config.seed, spec.name)
        rs = replicaset_name(config.seed, spec.name)
        containers = _containers(config, spec)

        resources.append(
            {
                "kind": "Deployment",
                "namespace": namespace,
                "name": spec.name,
                "labels": {"app": spec.name},
                "spec": {
                    "replicas": 1,
                    "selector": {"matchLabels": {"app": spec.name}},
                    "strategy": {"type": "RollingUpdate"},
                    "template": {
                        "metadata": {"labels": {"app": spec.name}},
                        "spec": {"containers": _containers(config, spec)},
                    },
                },
                "status": {
                    "phase": "Available",
                    "conditions": [
                        {
                            "type": "Available",
                            "status": "True",
                            "reason": "MinimumReplicasAvailable",
                            "message": "Deployment has minimum availability.",
                        },
                        {
                            "type": "Progressing",
                            "status": "True",
                            "reason": "NewReplicaSetAvailable",
                            "message": f'ReplicaSet "{rs}" has successfully progressed.',
                        },
                    ],
                    "restart_count": 0,
                },
                "events": [
                    {
                        "timestamp": freeze - 3605,
                        "type": "Normal",
                        "reason": "ScalingReplicaSet",
                        "message": f"Scaled up replica set {rs} to 1",
                    }
                ],
            }
        )
        resources.append(
            {
                "kind": "Pod",
                "namespace": namespace,
                "name": pod,
                "labels": {"app": spec.name, "pod-template-hash": rs.rsplit("-", 1)[-1]},
                "spec": {
                    "nodeName": node,
                    "podIP": f"10.244.{node_index}.{10 + idx}",
                    "serviceAccountName": "default",
                    "tolerations": [],
                    "containers": containers,
                },
                "status": {"phase": "Running", "conditions": _true_conditions(), "restart_count": 0},
                "events": _pod_events(freeze, namespace, pod, node, image, spec.name),
            }
        )
        resources.append(
            {
                "kind": "Service",
                "namespace": namespace,
                "name": spec.name,
                "labels": {"app": spec.name},
                "spec": {
                    "type": "ClusterIP",
                    "clusterIP": f"10.96.0.{10 + idx}",
                    "selector": {"app": spec.name},
                    "ports": [
                        {
                            "name": "grpc",
                            "port": spec.port,
                            "targetPort": spec.port,
                            "protocol": "TCP",
                        }
                    ],
                },
                "status": {"phase": "", "conditions": [], "restart_count": 0},
                "events": [],
            }
        )

    telemetry = {
        "logs": [
            {
                "service": spec.name,
                "namespace": namespace,
                "lines": _service_logs(config, spec.name),
            }
            for spec in ordered
        ],
        "metrics": [
            {
                "entity": spec.name,
                "metric_name": metric,
                "unit": METRIC_UNITS[metric],
                "samples": _metric_series(config, spec.name, metric),
            }
            for spec in ordered
            for metric in sorted(METRIC_UNITS)
        ],
        "alerts": [],
    }

    return {
        "snapshot_id": f"base-s{config.seed}",
        "case_meta": None,
        "freeze_time": freeze,
        "cluster": {
            "nodes": nodes,
            "namespaces": [namespace],
            "resources": resources,
            "topology": {"edges": {s.name: list(s.dependencies) for s in config.services}},
        },
        "telemetry": telemetry,
    }


def synthesize_base(config: BaseClusterConfig) -> Snapshot:
    return Snapshot.from_dict(base_draft(config), path="base")
