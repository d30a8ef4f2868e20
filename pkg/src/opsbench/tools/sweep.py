"""Exhaustive pre-execution of plausible diagnostic queries.

The sweep enumerates every entity-addressed invocation the snapshot can
answer (plus the global tools) and caches their observations.  The cache is
a derived artifact used for export, statistics, and the cache/dispatch
equivalence audit; live serving always goes through ``dispatch`` so that
arbitrary valid queries get deterministic answers too.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from ..canonical import read_json, write_canonical
from ..errors import SchemaError
from ..model import Snapshot
from .catalog import CATALOG
from .dispatch import PLURAL, dispatch
from .keys import Observation, ToolInvocation, canonical_key


@dataclass(frozen=True)
class ResponseCache:
    entries: Mapping[str, Observation]

    def __len__(self) -> int:
        return len(self.entries)

    def to_dict(self) -> dict:
        return {key: obs.to_dict() for key, obs in sorted(self.entries.items())}

    @classmethod
    def from_dict(cls, data: dict) -> "ResponseCache":
        if not isinstance(data, dict):
            raise SchemaError("cache: expected object of key to observation")
        entries = {}
        for key, raw in data.items():
            if not isinstance(raw, dict) or "status" not in raw:
                raise SchemaError(f"cache.{key}: malformed observation")
            entries[key] = Observation.from_dict(raw)
        return cls(entries=entries)


def enumerate_sweep(snapshot: Snapshot) -> Iterator[ToolInvocation]:
    cluster = snapshot.cluster
    # Entity-addressed retrieval and description over every stored object.
    for kind, namespace, name in sorted(cluster.resources):
        plural = PLURAL[kind]
        yield ToolInvocation(
            "GetResources",
            {"resource_type": plural, "namespace": namespace, "resource_name": name},
        )
        yield ToolInvocation(
            "DescribeResource",
            {"resource_type": plural, "resource_name": name, "namespace": namespace},
        )
    # Per-namespace listings for every kind that occurs there.
    for kind, namespace in sorted({(k, ns) for (k, ns, _) in cluster.resources}):
        yield ToolInvocation(
            "GetResources", {"resource_type": PLURAL[kind], "namespace": namespace}
        )
    # Service-shaped tools over every service, plus connectivity per declared port.
    for service in snapshot.services():
        yield ToolInvocation("GetAppYAML", {"service_name": service.name})
        yield ToolInvocation("GetServiceDependencies", {"service_name": service.name})
        yield ToolInvocation(
            "GetRecentLogs", {"service_name": service.name, "namespace": service.namespace}
        )
        yield ToolInvocation(
            "GetErrorLogs", {"service_name": service.name, "namespace": service.namespace}
        )
        spec = service.spec if isinstance(service.spec, dict) else {}
        for entry in spec.get("ports", []) or []:
            port = entry.get("port")
            if isinstance(port, int):
                yield ToolInvocation(
                    "CheckServiceConnectivity",
                    {
                        "namespace": service.namespace,
                        "service_name": service.name,
                        "port": port,
                    },
                )
    yield ToolInvocation("GetClusterConfiguration", {})
    yield ToolInvocation("GetAlerts", {})
    for node in cluster.nodes:
        for component in sorted(node.components):
            yield ToolInvocation(
                "CheckNodeServiceStatus",
                {"node_name": node.name, "component_name": component},
            )


def sweep(snapshot: Snapshot) -> ResponseCache:
    entries: dict[str, Observation] = {}
    for inv in enumerate_sweep(snapshot):
        entries[canonical_key(CATALOG, inv)] = dispatch(snapshot, inv)
    return ResponseCache(entries=entries)


def save_cache(cache: ResponseCache, path) -> None:
    write_canonical(path, cache.to_dict())


def load_cache(path) -> ResponseCache:
    return ResponseCache.from_dict(read_json(path))
