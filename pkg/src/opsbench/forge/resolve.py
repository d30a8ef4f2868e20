"""Placeholder resolution for templates against a concrete cluster draft.

Templates name seed-dependent objects symbolically; whole-string
placeholders resolve at build time:

    $namespace        the case namespace
    $pod:<service>    current pod name of the service's workload
    $rs:<service>     replica-set name derived from the build seed
    $port:<service>   first declared service port (integer)
"""

from __future__ import annotations

from typing import Any, Mapping

from ..errors import ForgeError
from .names import replicaset_name


class Resolver:
    def __init__(self, params: Mapping[str, Any], draft: dict, seed: int):
        self.params = params
        self.draft = draft
        self.seed = seed

    def _resources(self) -> list[dict]:
        return self.draft["cluster"]["resources"]

    def namespace(self) -> str:
        namespace = self.params.get("namespace")
        if namespace:
            return namespace
        namespaces = self.draft["cluster"]["namespaces"]
        if not namespaces:
            raise ForgeError("resolve: no namespace available")
        return namespaces[0]

    def pod_of(self, service: str) -> str:
        pods = [
            r
            for r in self._resources()
            if r["kind"] == "Pod" and r.get("labels", {}).get("app") == service
        ]
        if not pods:
            raise ForgeError(f"resolve: no pod found for service {service!r}")
        if len(pods) > 1:
            raise ForgeError(f"resolve: multiple pods for service {service!r}")
        return pods[0]["name"]

    def port_of(self, service: str) -> int:
        for r in self._resources():
            if r["kind"] == "Service" and r["name"] == service:
                ports = (r.get("spec") or {}).get("ports") or []
                if not ports or not isinstance(ports[0].get("port"), int):
                    raise ForgeError(f"resolve: service {service!r} declares no port")
                return ports[0]["port"]
        raise ForgeError(f"resolve: no service named {service!r}")

    def scalar(self, value: Any) -> Any:
        if not isinstance(value, str) or not value.startswith("$"):
            return value
        if value == "$namespace":
            return self.namespace()
        head, _, arg = value[1:].partition(":")
        if head == "pod" and arg:
            return self.pod_of(arg)
        if head == "rs" and arg:
            return replicaset_name(self.seed, arg)
        if head == "port" and arg:
            return self.port_of(arg)
        raise ForgeError(f"resolve: unknown placeholder {value!r}")

    def deep(self, value: Any) -> Any:
        if isinstance(value, dict):
            return {k: self.deep(v) for k, v in value.items()}
        if isinstance(value, list):
            return [self.deep(v) for v in value]
        return self.scalar(value)
