"""Base cluster configuration: the healthy storefront the forge perturbs.

The default topology mirrors a small storefront system: eleven gRPC
microservices behind a frontend, spread over four nodes.  Fault templates
target these services by name, so the defaults are part of the shipped
contract; custom configs may rename everything as long as templates agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from ..errors import ValidationError

# 2025-01-07 00:00:00 UTC; a fixed instant keeps every artifact reproducible.
DEFAULT_FREEZE_TIME = 1736208000

DEFAULT_THRESHOLDS: Mapping[str, float] = {
    "cpu_usage_millicores": 400.0,
    "memory_working_set_bytes": 419430400.0,  # 400 MiB
    "p99_latency_ms": 500.0,
    "error_rate_percent": 5.0,
}

METRIC_UNITS: Mapping[str, str] = {
    "cpu_usage_millicores": "m",
    "memory_working_set_bytes": "bytes",
    "p99_latency_ms": "ms",
    "error_rate_percent": "percent",
}


@dataclass(frozen=True)
class ServiceSpec:
    name: str
    port: int
    dependencies: tuple[str, ...] = ()
    image: str = ""
    cpu_request: str = "100m"
    memory_request: str = "128Mi"


DEFAULT_SERVICES: tuple[ServiceSpec, ...] = (
    ServiceSpec(
        "frontend",
        8080,
        (
            "adservice",
            "cartservice",
            "checkoutservice",
            "currencyservice",
            "productcatalogservice",
            "recommendationservice",
            "shippingservice",
        ),
    ),
    ServiceSpec(
        "checkoutservice",
        5050,
        (
            "cartservice",
            "currencyservice",
            "emailservice",
            "paymentservice",
            "productcatalogservice",
            "shippingservice",
        ),
    ),
    ServiceSpec("recommendationservice", 8081, ("productcatalogservice",)),
    ServiceSpec("cartservice", 7070, ("redis-cart",)),
    ServiceSpec("adservice", 9555),
    ServiceSpec("currencyservice", 7000),
    ServiceSpec("emailservice", 5000),
    ServiceSpec("paymentservice", 50051),
    ServiceSpec("productcatalogservice", 3550),
    ServiceSpec("shippingservice", 50052),
    ServiceSpec("redis-cart", 6379, (), image="registry.local/library/redis:7.2.4"),
)


@dataclass(frozen=True)
class BaseClusterConfig:
    node_count: int = 4
    namespace: str = "boutique"
    services: tuple[ServiceSpec, ...] = DEFAULT_SERVICES
    seed: int = 7
    telemetry_window_seconds: int = 900
    sample_interval_seconds: int = 15
    freeze_time: int = DEFAULT_FREEZE_TIME
    thresholds: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))
    registry: str = "registry.local"
    node_cpu_millicores: int = 4000
    node_memory_bytes: int = 8 * 2**30
    node_allocatable_cpu_millicores: int = 3800
    node_allocatable_memory_bytes: int = 7 * 2**30
    node_pod_capacity: int = 110

    def with_seed(self, seed: int) -> "BaseClusterConfig":
        return replace(self, seed=seed)

    def service(self, name: str) -> ServiceSpec:
        for spec in self.services:
            if spec.name == name:
                return spec
        raise ValidationError(f"config: unknown service {name!r}")

    def validate(self) -> None:
        if self.node_count < 1:
            raise ValidationError("config: node_count must be >= 1")
        if self.seed < 0:
            raise ValidationError("config: seed must be unsigned")
        if not self.namespace:
            raise ValidationError("config: namespace must be non-empty")
        if self.telemetry_window_seconds <= 0 or self.sample_interval_seconds <= 0:
            raise ValidationError("config: telemetry window and interval must be positive")
        names = [s.name for s in self.services]
        if len(names) != len(set(names)):
            raise ValidationError("config: duplicate service names")
        known = set(names)
        for spec in self.services:
            for dep in spec.dependencies:
                if dep not in known:
                    raise ValidationError(
                        f"config: service {spec.name!r} depends on unknown {dep!r}"
                    )
        self._check_acyclic()

    def _check_acyclic(self) -> None:
        deps = {s.name: s.dependencies for s in self.services}
        state: dict[str, int] = {}

        def visit(name: str) -> None:
            mark = state.get(name)
            if mark == 2:
                return
            if mark == 1:
                raise ValidationError(f"config: dependency cycle through {name!r}")
            state[name] = 1
            for dep in deps.get(name, ()):
                visit(dep)
            state[name] = 2

        for name in deps:
            visit(name)


def parse_cpu(value: str) -> int:
    """Kubernetes CPU quantity to millicores ("6000m", "2")."""
    value = value.strip()
    if value.endswith("m"):
        return int(value[:-1])
    return int(float(value) * 1000)


_MEMORY_UNITS = {"Ki": 2**10, "Mi": 2**20, "Gi": 2**30, "Ti": 2**40}


def parse_memory(value: str) -> int:
    """Kubernetes memory quantity to bytes ("128Mi", "1Gi")."""
    value = value.strip()
    for unit, factor in _MEMORY_UNITS.items():
        if value.endswith(unit):
            return int(float(value[: -len(unit)]) * factor)
    return int(value)
