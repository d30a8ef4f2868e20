"""Mocked diagnostic tool interface evaluated against frozen snapshots."""

from .catalog import CATALOG, CATALOG_BY_NAME, ParamSpec, ToolSpec, catalog_to_jsonable
from .keys import (
    Observation,
    ToolInvocation,
    ValidationFailure,
    canonical_key,
    decode_key,
    validate,
)
from .dispatch import dispatch
from .sweep import ResponseCache, enumerate_sweep, load_cache, save_cache, sweep

__all__ = [
    "CATALOG",
    "CATALOG_BY_NAME",
    "Observation",
    "ParamSpec",
    "ResponseCache",
    "ToolInvocation",
    "ToolSpec",
    "ValidationFailure",
    "canonical_key",
    "catalog_to_jsonable",
    "decode_key",
    "dispatch",
    "enumerate_sweep",
    "load_cache",
    "save_cache",
    "sweep",
    "validate",
]
