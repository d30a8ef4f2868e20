"""The ten-tool diagnostic catalog served to agents.

Specs are the single source of truth for argument validation, canonical
keys, and the ``tools.json`` artifact shipped with the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

Scalar = Union[str, int]


@dataclass(frozen=True)
class ParamSpec:
    name: str
    type: str  # "string" | "integer"
    required: bool
    default: Optional[Scalar] = None

    def to_dict(self) -> dict:
        out: dict = {"name": self.name, "type": self.type, "required": self.required}
        if self.default is not None:
            out["default"] = self.default
        return out


@dataclass(frozen=True)
class ToolSpec:
    tool_id: str
    name: str
    params: tuple[ParamSpec, ...]
    description: str

    def param(self, name: str) -> Optional[ParamSpec]:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def to_dict(self) -> dict:
        return {
            "tool_id": self.tool_id,
            "name": self.name,
            "params": [p.to_dict() for p in self.params],
            "description": self.description,
        }


def _s(name: str, required: bool = True) -> ParamSpec:
    return ParamSpec(name=name, type="string", required=required)


CATALOG: tuple[ToolSpec, ...] = (
    ToolSpec(
        "T1",
        "GetResources",
        (_s("resource_type"), _s("namespace"), _s("resource_name", required=False)),
        "List resources in a namespace with status and extended attributes.",
    ),
    ToolSpec(
        "T2",
        "DescribeResource",
        (_s("resource_type"), _s("resource_name"), _s("namespace")),
        "Get runtime details of a specific resource: state, conditions, and events.",
    ),
    ToolSpec(
        "T3",
        "GetAppYAML",
        (_s("service_name"),),
        "Get the deployment configuration YAML for a given service.",
    ),
    ToolSpec(
        "T4",
        "GetServiceDependencies",
        (_s("service_name"),),
        "Get service dependencies in a tree structure.",
    ),
    ToolSpec(
        "T5",
        "GetRecentLogs",
        (_s("service_name"), _s("namespace")),
        "Get recent logs of a service in a namespace for error detection (default: 50 lines).",
    ),
    ToolSpec(
        "T6",
        "CheckServiceConnectivity",
        (_s("namespace"), _s("service_name"), ParamSpec("port", "integer", True)),
        "Test service reachability via TCP handshake, returns connection success/failure.",
    ),
    ToolSpec(
        "T7",
        "GetClusterConfiguration",
        (),
        "Get cluster-wide node details such as resources, labels, taints, and status.",
    ),
    ToolSpec(
        "T8",
        "GetAlerts",
        (),
        "Get alerts for cluster metric anomalies generated by a threshold-based detector. "
        "Returns abnormal metrics with deviation magnitude.",
    ),
    ToolSpec(
        "T9",
        "GetErrorLogs",
        (_s("service_name"), _s("namespace")),
        "Return a characteristic summary of abnormal logs by matching error keywords "
        "(e.g., ERROR, FAIL).",
    ),
    ToolSpec(
        "T10",
        "CheckNodeServiceStatus",
        (_s("node_name"), _s("component_name")),
        "Probes liveness of control plane components on a node. Returns process status, "
        "runtime state, and recent log snippets.",
    ),
)

CATALOG_BY_NAME: dict[str, ToolSpec] = {spec.name: spec for spec in CATALOG}
CATALOG_BY_ID: dict[str, ToolSpec] = {spec.tool_id: spec for spec in CATALOG}


def catalog_to_jsonable() -> list[dict]:
    return [spec.to_dict() for spec in CATALOG]
