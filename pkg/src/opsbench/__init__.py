"""Deterministic replay environment and scoring harness for agentic cloud
fault diagnosis.

Frozen cluster snapshots are served through mocked diagnostic tools; fault
cases are synthesized from templates with automatically derived gold
trajectories; episodes are scored on both outcome accuracy and process
alignment.
"""

from .cases import AlertNotice, CaseBundle, Diagnosis, EpisodeRecord, GroundTruth, Trajectory
from .model import Snapshot, load_snapshot, lookup_resource, save_snapshot
from .metrics import score_episode, score_suite
from .tools import CATALOG, Observation, ToolInvocation, canonical_key, dispatch, sweep, validate

__version__ = "0.1.0"

__all__ = [
    "AlertNotice",
    "CATALOG",
    "CaseBundle",
    "Diagnosis",
    "EpisodeRecord",
    "GroundTruth",
    "Observation",
    "Snapshot",
    "ToolInvocation",
    "Trajectory",
    "__version__",
    "canonical_key",
    "dispatch",
    "load_snapshot",
    "lookup_resource",
    "save_snapshot",
    "score_episode",
    "score_suite",
    "sweep",
    "validate",
]
