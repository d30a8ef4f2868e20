"""Fault taxonomy: seven lifecycle categories and forty root-cause identifiers.

Every shipped fault template must use a (category, root cause) pair listed
in ``CATEGORY_ROOT_CAUSES``; loaders reject anything else.
"""

from __future__ import annotations

from enum import Enum


class FaultCategory(str, Enum):
    ADMISSION_CONTROL = "AdmissionControl"
    SCHEDULING = "Scheduling"
    STARTUP = "Startup"
    RUNTIME = "Runtime"
    SERVICE_ROUTING = "ServiceRouting"
    PERFORMANCE = "Performance"
    INFRASTRUCTURE = "Infrastructure"


class Difficulty(str, Enum):
    EASY = "Easy"
    MEDIUM = "Medium"
    HARD = "Hard"


class RootCauseType(str, Enum):
    # Admission control
    NAMESPACE_CPU_QUOTA_EXCEEDED = "NamespaceCPUQuotaExceeded"
    NAMESPACE_MEMORY_QUOTA_EXCEEDED = "NamespaceMemoryQuotaExceeded"
    NAMESPACE_POD_QUOTA_EXCEEDED = "NamespacePodQuotaExceeded"
    NAMESPACE_SERVICE_QUOTA_EXCEEDED = "NamespaceServiceQuotaExceeded"
    NAMESPACE_STORAGE_QUOTA_EXCEEDED = "NamespaceStorageQuotaExceeded"
    MISSING_SERVICE_ACCOUNT = "MissingServiceAccount"
    # Scheduling
    NODE_CORDONED = "NodeCordoned"
    NODE_AFFINITY_MISMATCH = "NodeAffinityMismatch"
    NODE_SELECTOR_MISMATCH = "NodeSelectorMismatch"
    POD_ANTI_AFFINITY_CONFLICT = "PodAntiAffinityConflict"
    TAINT_TOLERATION_MISMATCH = "TaintTolerationMismatch"
    INSUFFICIENT_NODE_CPU = "InsufficientNodeCPU"
    INSUFFICIENT_NODE_MEMORY = "InsufficientNodeMemory"
    PV_BINDING_OCCUPIED = "PVBindingOccupied"
    PVC_SELECTOR_MISMATCH = "PVCSelectorMismatch"
    PVC_STORAGE_CLASS_MISMATCH = "PVCStorageClassMismatch"
    PVC_CAPACITY_MISMATCH = "PVCCapacityMismatch"
    PVC_ACCESS_MODE_MISMATCH = "PVCAccessModeMismatch"
    # Startup
    VOLUME_MOUNT_PERMISSION_DENIED = "VolumeMountPermissionDenied"
    INCORRECT_IMAGE_REFERENCE = "IncorrectImageReference"
    IMAGE_REGISTRY_DNS_FAILURE = "ImageRegistryDNSFailure"
    MISSING_IMAGE_PULL_SECRET = "MissingImagePullSecret"
    # Runtime
    OOM_KILLED = "OOMKilled"
    LIVENESS_PROBE_INCORRECT_PROTOCOL = "LivenessProbeIncorrectProtocol"
    LIVENESS_PROBE_INCORRECT_PORT = "LivenessProbeIncorrectPort"
    LIVENESS_PROBE_INCORRECT_TIMING = "LivenessProbeIncorrectTiming"
    READINESS_PROBE_INCORRECT_PROTOCOL = "ReadinessProbeIncorrectProtocol"
    READINESS_PROBE_INCORRECT_PORT = "ReadinessProbeIncorrectPort"
    # Service routing
    SERVICE_SELECTOR_MISMATCH = "ServiceSelectorMismatch"
    SERVICE_PORT_MAPPING_MISMATCH = "ServicePortMappingMismatch"
    SERVICE_PROTOCOL_MISMATCH = "ServiceProtocolMismatch"
    SERVICE_ENV_VAR_ADDRESS_MISMATCH = "ServiceEnvVarAddressMismatch"
    # Performance
    POD_CPU_OVERLOAD = "PodCPUOverload"
    POD_NETWORK_DELAY = "PodNetworkDelay"
    # Infrastructure
    CONTAINERD_UNAVAILABLE = "ContainerdUnavailable"
    KUBELET_UNAVAILABLE = "KubeletUnavailable"
    KUBE_PROXY_UNAVAILABLE = "KubeProxyUnavailable"
    KUBE_SCHEDULER_UNAVAILABLE = "KubeSchedulerUnavailable"
    NODE_NETWORK_DELAY = "NodeNetworkDelay"
    NODE_NETWORK_PACKET_LOSS = "NodeNetworkPacketLoss"


CATEGORY_ROOT_CAUSES: dict[FaultCategory, tuple[RootCauseType, ...]] = {
    FaultCategory.ADMISSION_CONTROL: (
        RootCauseType.NAMESPACE_CPU_QUOTA_EXCEEDED,
        RootCauseType.NAMESPACE_MEMORY_QUOTA_EXCEEDED,
        RootCauseType.NAMESPACE_POD_QUOTA_EXCEEDED,
        RootCauseType.NAMESPACE_SERVICE_QUOTA_EXCEEDED,
        RootCauseType.NAMESPACE_STORAGE_QUOTA_EXCEEDED,
        RootCauseType.MISSING_SERVICE_ACCOUNT,
    ),
    FaultCategory.SCHEDULING: (
        RootCauseType.NODE_CORDONED,
        RootCauseType.NODE_AFFINITY_MISMATCH,
        RootCauseType.NODE_SELECTOR_MISMATCH,
        RootCauseType.POD_ANTI_AFFINITY_CONFLICT,
        RootCauseType.TAINT_TOLERATION_MISMATCH,
        RootCauseType.INSUFFICIENT_NODE_CPU,
        RootCauseType.INSUFFICIENT_NODE_MEMORY,
        RootCauseType.PV_BINDING_OCCUPIED,
        RootCauseType.PVC_SELECTOR_MISMATCH,
        RootCauseType.PVC_STORAGE_CLASS_MISMATCH,
        RootCauseType.PVC_CAPACITY_MISMATCH,
        RootCauseType.PVC_ACCESS_MODE_MISMATCH,
    ),
    FaultCategory.STARTUP: (
        RootCauseType.VOLUME_MOUNT_PERMISSION_DENIED,
        RootCauseType.INCORRECT_IMAGE_REFERENCE,
        RootCauseType.IMAGE_REGISTRY_DNS_FAILURE,
        RootCauseType.MISSING_IMAGE_PULL_SECRET,
    ),
    FaultCategory.RUNTIME: (
        RootCauseType.OOM_KILLED,
        RootCauseType.LIVENESS_PROBE_INCORRECT_PROTOCOL,
        RootCauseType.LIVENESS_PROBE_INCORRECT_PORT,
        RootCauseType.LIVENESS_PROBE_INCORRECT_TIMING,
        RootCauseType.READINESS_PROBE_INCORRECT_PROTOCOL,
        RootCauseType.READINESS_PROBE_INCORRECT_PORT,
    ),
    FaultCategory.SERVICE_ROUTING: (
        RootCauseType.SERVICE_SELECTOR_MISMATCH,
        RootCauseType.SERVICE_PORT_MAPPING_MISMATCH,
        RootCauseType.SERVICE_PROTOCOL_MISMATCH,
        RootCauseType.SERVICE_ENV_VAR_ADDRESS_MISMATCH,
    ),
    FaultCategory.PERFORMANCE: (
        RootCauseType.POD_CPU_OVERLOAD,
        RootCauseType.POD_NETWORK_DELAY,
    ),
    FaultCategory.INFRASTRUCTURE: (
        RootCauseType.CONTAINERD_UNAVAILABLE,
        RootCauseType.KUBELET_UNAVAILABLE,
        RootCauseType.KUBE_PROXY_UNAVAILABLE,
        RootCauseType.KUBE_SCHEDULER_UNAVAILABLE,
        RootCauseType.NODE_NETWORK_DELAY,
        RootCauseType.NODE_NETWORK_PACKET_LOSS,
    ),
}

# Diagnostic reasoning complexity is assigned per category.
CATEGORY_DIFFICULTY: dict[FaultCategory, Difficulty] = {
    FaultCategory.ADMISSION_CONTROL: Difficulty.HARD,
    FaultCategory.SCHEDULING: Difficulty.MEDIUM,
    FaultCategory.STARTUP: Difficulty.EASY,
    FaultCategory.RUNTIME: Difficulty.EASY,
    FaultCategory.SERVICE_ROUTING: Difficulty.MEDIUM,
    FaultCategory.PERFORMANCE: Difficulty.HARD,
    FaultCategory.INFRASTRUCTURE: Difficulty.HARD,
}

ROOT_CAUSE_CATEGORY: dict[RootCauseType, FaultCategory] = {
    rc: cat for cat, causes in CATEGORY_ROOT_CAUSES.items() for rc in causes
}


def category_of(root_cause: RootCauseType) -> FaultCategory:
    return ROOT_CAUSE_CATEGORY[root_cause]


def is_valid_pair(category: FaultCategory, root_cause: RootCauseType) -> bool:
    return ROOT_CAUSE_CATEGORY.get(root_cause) is category
