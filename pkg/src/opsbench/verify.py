"""Shipped-case audit: determinism, cache fidelity, gold integrity, leaks.

``verify_case`` re-derives everything checkable from a case directory
alone: the snapshot must round-trip byte-for-byte, every cache entry must
equal a fresh dispatch, every gold key must be cached and answerable,
randomized absent-entity probes must all come back not_found, the gold
ordering and minimality rules must hold, and no agent-visible byte may
name the root cause.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from .canonical import canonical_bytes
from .cases import load_case
from .forge.lint import find_leaks
from .model import Snapshot, load_snapshot
from .tools import CATALOG, ToolInvocation, decode_key, dispatch, load_cache


@dataclass
class CaseAudit:
    case_id: str
    cache_entries: int
    problems: list[str]

    @property
    def ok(self) -> bool:
        return not self.problems


def _existing_names(snapshot: Snapshot) -> set[str]:
    names = set(snapshot.cluster.namespaces)
    for kind, namespace, name in snapshot.cluster.resources:
        names.add(name)
    for node in snapshot.cluster.nodes:
        names.add(node.name)
        names.update(node.components)
    return names


def absent_entity_probes(
    snapshot: Snapshot, rng: random.Random, count: int
) -> list[ToolInvocation]:
    """Schema-valid invocations that each name at least one absent entity."""
    existing = _existing_names(snapshot)
    namespace = snapshot.cluster.namespaces[0] if snapshot.cluster.namespaces else ""
    node = snapshot.cluster.nodes[0].name if snapshot.cluster.nodes else "node-1"

    def ghost() -> str:
        while True:
            name = "ghost-" + "".join(rng.choice("abcdefghjkmnpqrstuvwxyz") for _ in range(8))
            if name not in existing:
                return name

    shapes = [
        lambda: ToolInvocation(
            "GetResources", {"resource_type": "pods", "namespace": ghost()}
        ),
        lambda: ToolInvocation(
            "GetResources",
            {"resource_type": "pods", "namespace": namespace, "resource_name": ghost()},
        ),
        lambda: ToolInvocation(
            "GetResources", {"resource_type": ghost(), "namespace": namespace}
        ),
        lambda: ToolInvocation(
            "DescribeResource",
            {"resource_type": "pods", "resource_name": ghost(), "namespace": namespace},
        ),
        lambda: ToolInvocation(
            "DescribeResource",
            {"resource_type": "services", "resource_name": ghost(), "namespace": ghost()},
        ),
        lambda: ToolInvocation("GetAppYAML", {"service_name": ghost()}),
        lambda: ToolInvocation("GetServiceDependencies", {"service_name": ghost()}),
        lambda: ToolInvocation(
            "GetRecentLogs", {"service_name": ghost(), "namespace": namespace}
        ),
        lambda: ToolInvocation(
            "GetRecentLogs", {"service_name": ghost(), "namespace": ghost()}
        ),
        lambda: ToolInvocation(
            "GetErrorLogs", {"service_name": ghost(), "namespace": namespace}
        ),
        lambda: ToolInvocation(
            "CheckServiceConnectivity",
            {"namespace": namespace, "service_name": ghost(), "port": 9999},
        ),
        lambda: ToolInvocation(
            "CheckServiceConnectivity",
            {"namespace": ghost(), "service_name": ghost(), "port": 8080},
        ),
        lambda: ToolInvocation(
            "CheckNodeServiceStatus", {"node_name": ghost(), "component_name": "kubelet"}
        ),
        lambda: ToolInvocation(
            "CheckNodeServiceStatus", {"node_name": node, "component_name": ghost()}
        ),
    ]
    return [shapes[rng.randrange(len(shapes))]() for _ in range(count)]


def verify_case(case_dir, probe_count: int = 200) -> CaseAudit:
    case_dir = Path(case_dir)
    problems: list[str] = []
    cache_entries = 0
    case_id = case_dir.name
    try:
        snapshot_path = case_dir / "snapshot.json"
        snapshot = load_snapshot(snapshot_path)
        if canonical_bytes(snapshot.to_dict()) != snapshot_path.read_bytes():
            problems.append("snapshot.json is not in canonical byte form")

        bundle = load_case(case_dir / "case.json", check_answerability=True)
        case_id = bundle.case_id
        truth = bundle.ground_truth

        gold_keys = truth.gold_keys()
        if len(set(gold_keys)) != len(gold_keys):
            problems.append("gold trajectory repeats a key (minimality violation)")
        truth.check_precedence()

        cache = load_cache(case_dir / "cache.json")
        cache_entries = len(cache.entries)
        for key, cached in sorted(cache.entries.items()):
            fresh = dispatch(snapshot, decode_key(CATALOG, key))
            if fresh != cached:
                problems.append(f"cache entry diverges from dispatch: {key}")
        for key in gold_keys:
            cached = cache.entries.get(key)
            if cached is None:
                problems.append(f"gold key missing from cache: {key}")
            elif cached.status != "ok":
                problems.append(f"gold key cached with status {cached.status}: {key}")

        rng = random.Random(f"verify|{bundle.case_id}")
        for probe in absent_entity_probes(snapshot, rng, probe_count):
            observation = dispatch(snapshot, probe)
            if observation.status != "not_found":
                problems.append(
                    f"absent-entity probe returned {observation.status}: "
                    f"{probe.tool_name} {dict(probe.args)}"
                )

        problems.extend(find_leaks(snapshot, cache, bundle.alert, truth))
    except Exception as exc:  # audit must report, not crash
        problems.append(f"audit error: {exc}")
    return CaseAudit(case_id=case_id, cache_entries=cache_entries, problems=problems)


def case_dirs(cases_root) -> list[Path]:
    root = Path(cases_root)
    return sorted(p.parent for p in root.glob("*/case.json"))


def verify_all(cases_root, probe_count: int = 200) -> list[CaseAudit]:
    return [verify_case(d, probe_count) for d in case_dirs(cases_root)]
