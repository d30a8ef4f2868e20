"""Deterministic synthesis of fault cases over a simulated cluster."""

from .config import BaseClusterConfig, ServiceSpec, DEFAULT_THRESHOLDS
from .base import synthesize_base
from .template import FaultTemplate, load_template, load_shipped_templates
from .propagation import apply_fault
from .alerts import detect_alerts
from .invert import invert_ground_truth
from .build import build_case, build_all

__all__ = [
    "BaseClusterConfig",
    "DEFAULT_THRESHOLDS",
    "FaultTemplate",
    "ServiceSpec",
    "apply_fault",
    "build_all",
    "build_case",
    "detect_alerts",
    "invert_ground_truth",
    "load_shipped_templates",
    "load_template",
    "synthesize_base",
]
