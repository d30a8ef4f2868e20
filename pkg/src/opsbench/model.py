"""Frozen data model for a captured cluster and its telemetry.

A :class:`Snapshot` is the complete, immutable record of one cluster at a
single freeze instant: control-plane objects, node inventory, service
topology, and the telemetry window (logs, metric series, threshold alerts).
Every diagnostic tool answers from a snapshot alone; nothing here mutates
after construction.

Serialization is canonical (see :mod:`opsbench.canonical`): saving the same
snapshot twice produces byte-identical files, and
``serialize(deserialize(serialize(s))) == serialize(s)`` holds exactly.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional

from .canonical import read_json, write_canonical
from .errors import SchemaError, ValidationError
from .taxonomy import Difficulty, FaultCategory, RootCauseType, is_valid_pair

EVENT_TYPES = ("Normal", "Warning")
LOG_LEVELS = ("DEBUG", "INFO", "WARN", "ERROR", "FATAL")
# Node components eligible for liveness probing, per the infrastructure
# fault list.
COMPONENT_NAMES = ("containerd", "kube-proxy", "kube-scheduler", "kubelet")
COMPONENT_STATES = ("active", "dead")

ResourceKey = tuple[str, str, str]  # (kind, namespace, name)


def _require(data: Any, path: str) -> dict:
    if not isinstance(data, dict):
        raise SchemaError(f"{path}: expected object, got {type(data).__name__}")
    return data


def _get(data: dict, key: str, kind: type | tuple, path: str) -> Any:
    if key not in data:
        raise SchemaError(f"{path}.{key}: missing required field")
    value = data[key]
    if not isinstance(value, kind):
        raise SchemaError(f"{path}.{key}: wrong type {type(value).__name__}")
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"{path}.{key}: wrong type bool")
    return value


def _get_int(data: dict, key: str, path: str) -> int:
    value = _get(data, key, int, path)
    if isinstance(value, bool):
        raise SchemaError(f"{path}.{key}: wrong type bool")
    return value


def _get_float(data: dict, key: str, path: str) -> float:
    if key not in data:
        raise SchemaError(f"{path}.{key}: missing required field")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{path}.{key}: expected number")
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{path}.{key}: value must be finite")
    return value


def _check_document(value: Any, path: str) -> None:
    """Accept only JSON-representable trees of maps, lists, and scalars."""
    if value is None or isinstance(value, (str, bool, int)):
        return
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError(f"{path}: non-finite number in document")
        return
    if isinstance(value, list):
        for i, item in enumerate(value):
            _check_document(item, f"{path}[{i}]")
        return
    if isinstance(value, dict):
        for key, item in value.items():
            if not isinstance(key, str):
                raise SchemaError(f"{path}: document keys must be strings")
            _check_document(item, f"{path}.{key}")
        return
    raise SchemaError(f"{path}: unsupported value type {type(value).__name__}")


def _string_map(data: dict, key: str, path: str) -> dict[str, str]:
    raw = _get(data, key, dict, path)
    out: dict[str, str] = {}
    for k, v in raw.items():
        if not isinstance(k, str) or not isinstance(v, str):
            raise SchemaError(f"{path}.{key}: expected string-to-string map")
        out[k] = v
    return out


@dataclass(frozen=True)
class Condition:
    type: str
    status: str
    reason: str
    message: str

    def to_dict(self) -> dict:
        return {
            "type": self.type,
            "status": self.status,
            "reason": self.reason,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Condition":
        data = _require(data, path)
        return cls(
            type=_get(data, "type", str, path),
            status=_get(data, "status", str, path),
            reason=_get(data, "reason", str, path),
            message=_get(data, "message", str, path),
        )


@dataclass(frozen=True)
class Event:
    timestamp: int
    type: str  # Normal | Warning
    reason: str
    message: str

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "type": self.type,
            "reason": self.reason,
            "message": self.message,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Event":
        data = _require(data, path)
        event = cls(
            timestamp=_get_int(data, "timestamp", path),
            type=_get(data, "type", str, path),
            reason=_get(data, "reason", str, path),
            message=_get(data, "message", str, path),
        )
        if event.type not in EVENT_TYPES:
            raise ValidationError(f"{path}.type: unknown event type {event.type!r}")
        if not event.message:
            raise ValidationError(f"{path}.message: event message must be non-empty")
        return event


@dataclass(frozen=True)
class ResourceStatus:
    phase: str
    conditions: tuple[Condition, ...] = ()
    restart_count: int = 0

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "conditions": [c.to_dict() for c in self.conditions],
            "restart_count": self.restart_count,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ResourceStatus":
        data = _require(data, path)
        conditions = _get(data, "conditions", list, path)
        status = cls(
            phase=_get(data, "phase", str, path),
            conditions=tuple(
                Condition.from_dict(c, f"{path}.conditions[{i}]")
                for i, c in enumerate(conditions)
            ),
            restart_count=_get_int(data, "restart_count", path),
        )
        if status.restart_count < 0:
            raise ValidationError(f"{path}.restart_count: must be >= 0")
        return status


@dataclass(frozen=True)
class ResourceObject:
    kind: str
    namespace: str
    name: str
    labels: Mapping[str, str]
    spec: Any
    status: ResourceStatus
    events: tuple[Event, ...] = ()

    @property
    def key(self) -> ResourceKey:
        return (self.kind, self.namespace, self.name)

    def to_dict(self) -> dict:
        # spec is a free-form tree; copy it so callers can never reach back
        # into this frozen object through a shared reference.
        return {
            "kind": self.kind,
            "namespace": self.namespace,
            "name": self.name,
            "labels": dict(self.labels),
            "spec": copy.deepcopy(self.spec),
            "status": self.status.to_dict(),
            "events": [e.to_dict() for e in self.events],
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ResourceObject":
        data = _require(data, path)
        kind = _get(data, "kind", str, path)
        name = _get(data, "name", str, path)
        spec = data.get("spec")
        _check_document(spec, f"{path}.spec")
        events = _get(data, "events", list, path)
        obj = cls(
            kind=kind,
            namespace=_get(data, "namespace", str, path),
            name=name,
            labels=_string_map(data, "labels", path),
            spec=copy.deepcopy(spec),
            status=ResourceStatus.from_dict(_get(data, "status", dict, path), f"{path}.status"),
            events=tuple(
                Event.from_dict(e, f"{path}.events[{i}]") for i, e in enumerate(events)
            ),
        )
        if not kind or not name:
            raise ValidationError(f"{path}: kind and name must be non-empty")
        for earlier, later in zip(obj.events, obj.events[1:]):
            if later.timestamp < earlier.timestamp:
                raise ValidationError(
                    f"{path}.events: timestamps must be ascending "
                    f"({later.timestamp} after {earlier.timestamp})"
                )
        return obj


@dataclass(frozen=True)
class ResourceQuantities:
    cpu_millicores: int
    memory_bytes: int
    pods: int

    def to_dict(self) -> dict:
        return {
            "cpu_millicores": self.cpu_millicores,
            "memory_bytes": self.memory_bytes,
            "pods": self.pods,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ResourceQuantities":
        data = _require(data, path)
        quantities = cls(
            cpu_millicores=_get_int(data, "cpu_millicores", path),
            memory_bytes=_get_int(data, "memory_bytes", path),
            pods=_get_int(data, "pods", path),
        )
        for name, value in quantities.to_dict().items():
            if value < 0:
                raise ValidationError(f"{path}.{name}: must be >= 0")
        return quantities


@dataclass(frozen=True)
class Taint:
    key: str
    value: str
    effect: str

    def to_dict(self) -> dict:
        return {"key": self.key, "value": self.value, "effect": self.effect}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Taint":
        data = _require(data, path)
        return cls(
            key=_get(data, "key", str, path),
            value=_get(data, "value", str, path),
            effect=_get(data, "effect", str, path),
        )


@dataclass(frozen=True)
class ComponentStatus:
    process_state: str  # active | dead
    runtime_state: str
    recent_log: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "process_state": self.process_state,
            "runtime_state": self.runtime_state,
            "recent_log": list(self.recent_log),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ComponentStatus":
        data = _require(data, path)
        lines = _get(data, "recent_log", list, path)
        if any(not isinstance(line, str) for line in lines):
            raise SchemaError(f"{path}.recent_log: expected list of strings")
        status = cls(
            process_state=_get(data, "process_state", str, path),
            runtime_state=_get(data, "runtime_state", str, path),
            recent_log=tuple(lines),
        )
        if status.process_state not in COMPONENT_STATES:
            raise ValidationError(
                f"{path}.process_state: unknown state {status.process_state!r}"
            )
        if len(status.recent_log) > 20:
            raise ValidationError(f"{path}.recent_log: capped at 20 lines")
        return status


@dataclass(frozen=True)
class NodeInfo:
    name: str
    capacity: ResourceQuantities
    allocatable: ResourceQuantities
    labels: Mapping[str, str]
    taints: tuple[Taint, ...]
    conditions: tuple[Condition, ...]
    components: Mapping[str, ComponentStatus]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "capacity": self.capacity.to_dict(),
            "allocatable": self.allocatable.to_dict(),
            "labels": dict(self.labels),
            "taints": [t.to_dict() for t in self.taints],
            "conditions": [c.to_dict() for c in self.conditions],
            "components": {k: v.to_dict() for k, v in sorted(self.components.items())},
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "NodeInfo":
        data = _require(data, path)
        taints = _get(data, "taints", list, path)
        conditions = _get(data, "conditions", list, path)
        components_raw = _get(data, "components", dict, path)
        components = {}
        for comp_name, comp in components_raw.items():
            if comp_name not in COMPONENT_NAMES:
                raise ValidationError(f"{path}.components: unknown component {comp_name!r}")
            components[comp_name] = ComponentStatus.from_dict(
                comp, f"{path}.components.{comp_name}"
            )
        node = cls(
            name=_get(data, "name", str, path),
            capacity=ResourceQuantities.from_dict(
                _get(data, "capacity", dict, path), f"{path}.capacity"
            ),
            allocatable=ResourceQuantities.from_dict(
                _get(data, "allocatable", dict, path), f"{path}.allocatable"
            ),
            labels=_string_map(data, "labels", path),
            taints=tuple(Taint.from_dict(t, f"{path}.taints[{i}]") for i, t in enumerate(taints)),
            conditions=tuple(
                Condition.from_dict(c, f"{path}.conditions[{i}]")
                for i, c in enumerate(conditions)
            ),
            components=components,
        )
        cap, alloc = node.capacity, node.allocatable
        if (
            alloc.cpu_millicores > cap.cpu_millicores
            or alloc.memory_bytes > cap.memory_bytes
            or alloc.pods > cap.pods
        ):
            raise ValidationError(f"{path}: allocatable exceeds capacity")
        return node


@dataclass(frozen=True)
class ServiceTopology:
    edges: Mapping[str, tuple[str, ...]]

    def to_dict(self) -> dict:
        return {"edges": {k: list(v) for k, v in sorted(self.edges.items())}}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ServiceTopology":
        data = _require(data, path)
        edges_raw = _get(data, "edges", dict, path)
        edges: dict[str, tuple[str, ...]] = {}
        for service, deps in edges_raw.items():
            if not isinstance(service, str) or not isinstance(deps, list):
                raise SchemaError(f"{path}.edges: expected map of string to list")
            if any(not isinstance(d, str) for d in deps):
                raise SchemaError(f"{path}.edges.{service}: expected list of strings")
            edges[service] = tuple(deps)
        topology = cls(edges=edges)
        topology._check_acyclic(path)
        return topology

    def _check_acyclic(self, path: str) -> None:
        state: dict[str, int] = {}  # 1 = visiting, 2 = done

        def visit(node: str, trail: tuple[str, ...]) -> None:
            mark = state.get(node)
            if mark == 2:
                return
            if mark == 1:
                raise ValidationError(f"{path}.edges: dependency cycle through {node!r}")
            state[node] = 1
            for dep in self.edges.get(node, ()):
                visit(dep, trail + (node,))
            state[node] = 2

        for service in self.edges:
            visit(service, ())

    def subtree(self, service: str) -> dict:
        """Dependency tree rooted at ``service`` (edges are acyclic)."""
        return {
            "service": service,
            "dependencies": [self.subtree(dep) for dep in self.edges.get(service, ())],
        }


@dataclass(frozen=True)
class LogLine:
    timestamp: int
    level: str
    message: str

    def to_dict(self) -> dict:
        return {"timestamp": self.timestamp, "level": self.level, "message": self.message}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "LogLine":
        data = _require(data, path)
        line = cls(
            timestamp=_get_int(data, "timestamp", path),
            level=_get(data, "level", str, path),
            message=_get(data, "message", str, path),
        )
        if line.level not in LOG_LEVELS:
            raise ValidationError(f"{path}.level: unknown log level {line.level!r}")
        return line


@dataclass(frozen=True)
class MetricSeries:
    unit: str
    samples: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {"unit": self.unit, "samples": [[ts, value] for ts, value in self.samples]}

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "MetricSeries":
        data = _require(data, path)
        raw = _get(data, "samples", list, path)
        samples: list[tuple[int, float]] = []
        for i, pair in enumerate(raw):
            if not isinstance(pair, list) or len(pair) != 2:
                raise SchemaError(f"{path}.samples[{i}]: expected [timestamp, value]")
            ts, value = pair
            if isinstance(ts, bool) or not isinstance(ts, int):
                raise SchemaError(f"{path}.samples[{i}]: timestamp must be an integer")
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(f"{path}.samples[{i}]: value must be a number")
            value = float(value)
            if not math.isfinite(value):
                raise ValidationError(f"{path}.samples[{i}]: value must be finite")
            samples.append((ts, value))
        for (t0, _), (t1, _) in zip(samples, samples[1:]):
            if t1 <= t0:
                raise ValidationError(f"{path}.samples: timestamps must be strictly increasing")
        return cls(unit=_get(data, "unit", str, path), samples=tuple(samples))


@dataclass(frozen=True)
class Alert:
    metric_name: str
    entity: str
    threshold: float
    observed: float
    deviation: float
    timestamp: int

    def to_dict(self) -> dict:
        return {
            "metric_name": self.metric_name,
            "entity": self.entity,
            "threshold": self.threshold,
            "observed": self.observed,
            "deviation": self.deviation,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "Alert":
        data = _require(data, path)
        alert = cls(
            metric_name=_get(data, "metric_name", str, path),
            entity=_get(data, "entity", str, path),
            threshold=_get_float(data, "threshold", path),
            observed=_get_float(data, "observed", path),
            deviation=_get_float(data, "deviation", path),
            timestamp=_get_int(data, "timestamp", path),
        )
        if alert.threshold != 0.0:
            expected = (alert.observed - alert.threshold) / abs(alert.threshold)
            if abs(alert.deviation - expected) > 1e-9:
                raise ValidationError(
                    f"{path}.deviation: inconsistent with observed/threshold"
                )
        elif alert.deviation * (alert.observed - alert.threshold) < 0:
            raise ValidationError(f"{path}.deviation: sign inconsistent with observation")
        return alert


@dataclass(frozen=True)
class TelemetryStore:
    logs: Mapping[tuple[str, str], tuple[LogLine, ...]]
    metrics: Mapping[tuple[str, str], MetricSeries]
    alerts: tuple[Alert, ...]

    def to_dict(self) -> dict:
        return {
            "logs": [
                {"service": service, "namespace": namespace, "lines": [l.to_dict() for l in lines]}
                for (service, namespace), lines in sorted(self.logs.items())
            ],
            "metrics": [
                {"entity": entity, "metric_name": metric, **series.to_dict()}
                for (entity, metric), series in sorted(self.metrics.items())
            ],
            "alerts": [a.to_dict() for a in self.alerts],
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "TelemetryStore":
        data = _require(data, path)
        logs: dict[tuple[str, str], tuple[LogLine, ...]] = {}
        for i, entry in enumerate(_get(data, "logs", list, path)):
            entry_path = f"{path}.logs[{i}]"
            entry = _require(entry, entry_path)
            service = _get(entry, "service", str, entry_path)
            namespace = _get(entry, "namespace", str, entry_path)
            lines = _get(entry, "lines", list, entry_path)
            if (service, namespace) in logs:
                raise ValidationError(f"{entry_path}: duplicate log stream")
            logs[(service, namespace)] = tuple(
                LogLine.from_dict(l, f"{entry_path}.lines[{j}]") for j, l in enumerate(lines)
            )
        metrics: dict[tuple[str, str], MetricSeries] = {}
        for i, entry in enumerate(_get(data, "metrics", list, path)):
            entry_path = f"{path}.metrics[{i}]"
            entry = _require(entry, entry_path)
            entity = _get(entry, "entity", str, entry_path)
            metric = _get(entry, "metric_name", str, entry_path)
            if (entity, metric) in metrics:
                raise ValidationError(f"{entry_path}: duplicate metric series")
            metrics[(entity, metric)] = MetricSeries.from_dict(entry, entry_path)
        alerts = tuple(
            Alert.from_dict(a, f"{path}.alerts[{i}]")
            for i, a in enumerate(_get(data, "alerts", list, path))
        )
        for earlier, later in zip(alerts, alerts[1:]):
            if later.timestamp < earlier.timestamp:
                raise ValidationError(f"{path}.alerts: timestamps must be ascending")
        return cls(logs=logs, metrics=metrics, alerts=alerts)


@dataclass(frozen=True)
class CaseMeta:
    case_id: str
    category: FaultCategory
    root_cause_type: RootCauseType
    difficulty: Difficulty
    seed: int

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "category": self.category.value,
            "root_cause_type": self.root_cause_type.value,
            "difficulty": self.difficulty.value,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "CaseMeta":
        data = _require(data, path)
        try:
            category = FaultCategory(_get(data, "category", str, path))
        except ValueError:
            raise SchemaError(f"{path}.category: unknown category") from None
        try:
            root_cause = RootCauseType(_get(data, "root_cause_type", str, path))
        except ValueError:
            raise SchemaError(f"{path}.root_cause_type: unknown root cause type") from None
        try:
            difficulty = Difficulty(_get(data, "difficulty", str, path))
        except ValueError:
            raise SchemaError(f"{path}.difficulty: unknown difficulty") from None
        seed = _get_int(data, "seed", path)
        if seed < 0:
            raise ValidationError(f"{path}.seed: must be unsigned")
        if not is_valid_pair(category, root_cause):
            raise ValidationError(
                f"{path}: root cause {root_cause.value} does not belong to "
                f"category {category.value}"
            )
        return cls(
            case_id=_get(data, "case_id", str, path),
            category=category,
            root_cause_type=root_cause,
            difficulty=difficulty,
            seed=seed,
        )


@dataclass(frozen=True)
class ClusterState:
    nodes: tuple[NodeInfo, ...]
    namespaces: tuple[str, ...]
    resources: Mapping[ResourceKey, ResourceObject]
    topology: ServiceTopology

    def to_dict(self) -> dict:
        return {
            "nodes": [n.to_dict() for n in self.nodes],
            "namespaces": list(self.namespaces),
            "resources": [self.resources[key].to_dict() for key in sorted(self.resources)],
            "topology": self.topology.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str) -> "ClusterState":
        data = _require(data, path)
        nodes = tuple(
            NodeInfo.from_dict(n, f"{path}.nodes[{i}]")
            for i, n in enumerate(_get(data, "nodes", list, path))
        )
        namespaces_raw = _get(data, "namespaces", list, path)
        if any(not isinstance(ns, str) for ns in namespaces_raw):
            raise SchemaError(f"{path}.namespaces: expected list of strings")
        namespaces = tuple(namespaces_raw)
        resources: dict[ResourceKey, ResourceObject] = {}
        for i, entry in enumerate(_get(data, "resources", list, path)):
            obj = ResourceObject.from_dict(entry, f"{path}.resources[{i}]")
            if obj.key in resources:
                raise ValidationError(f"{path}.resources[{i}]: duplicate key {obj.key}")
            # Cluster-scoped kinds use the empty namespace.
            if obj.namespace and obj.namespace not in namespaces:
                raise ValidationError(
                    f"{path}.resources[{i}]: namespace {obj.namespace!r} not declared"
                )
            resources[obj.key] = obj
        topology = ServiceTopology.from_dict(_get(data, "topology", dict, path), f"{path}.topology")
        service_names = {
            name for (kind, _, name) in resources if kind == "Service"
        }
        for service, deps in topology.edges.items():
            for vertex in (service, *deps):
                if vertex not in service_names:
                    raise ValidationError(
                        f"{path}.topology: vertex {vertex!r} names no Service resource"
                    )
        return cls(nodes=nodes, namespaces=namespaces, resources=resources, topology=topology)


@dataclass(frozen=True)
class Snapshot:
    snapshot_id: str
    case_meta: Optional[CaseMeta]
    cluster: ClusterState
    telemetry: TelemetryStore
    freeze_time: int
    _services_cache: dict = field(
        default_factory=dict, compare=False, repr=False, hash=False
    )

    def to_dict(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "case_meta": self.case_meta.to_dict() if self.case_meta else None,
            "freeze_time": self.freeze_time,
            "cluster": self.cluster.to_dict(),
            "telemetry": self.telemetry.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Any, path: str = "snapshot") -> "Snapshot":
        data = _require(data, path)
        if "case_meta" not in data:
            raise SchemaError(f"{path}.case_meta: missing required field")
        meta = data["case_meta"]
        return cls(
            snapshot_id=_get(data, "snapshot_id", str, path),
            case_meta=None if meta is None else CaseMeta.from_dict(meta, f"{path}.case_meta"),
            cluster=ClusterState.from_dict(_get(data, "cluster", dict, path), f"{path}.cluster"),
            telemetry=TelemetryStore.from_dict(
                _get(data, "telemetry", dict, path), f"{path}.telemetry"
            ),
            freeze_time=_get_int(data, "freeze_time", path),
        )

    def services(self) -> tuple[ResourceObject, ...]:
        """All Service resources, sorted by (namespace, name)."""
        cached = self._services_cache.get("services")
        if cached is None:
            cached = tuple(
                self.cluster.resources[key]
                for key in sorted(self.cluster.resources)
                if key[0] == "Service"
            )
            self._services_cache["services"] = cached
        return cached


def lookup_resource(
    cluster: ClusterState, kind: str, namespace: str, name: str
) -> Optional[ResourceObject]:
    """Exact-key lookup; a miss returns None, never raises."""
    return cluster.resources.get((kind, namespace, name))


def save_snapshot(snapshot: Snapshot, path) -> None:
    write_canonical(path, snapshot.to_dict())


def load_snapshot(path) -> Snapshot:
    return Snapshot.from_dict(read_json(path), path="snapshot")
