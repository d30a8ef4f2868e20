"""Seed-derived object names in the style Kubernetes controllers generate.

Suffixes hash (seed, inputs) through SHA-256, so names are stable across
processes and platforms for the same seed.
"""

from __future__ import annotations

import hashlib

_ALPHABET = "bcdfghjklmnpqrstvwxz2456789"


def name_suffix(seed: int, *parts: str, length: int = 5) -> str:
    digest = hashlib.sha256("|".join((str(seed), *parts)).encode("utf-8")).digest()
    return "".join(_ALPHABET[b % len(_ALPHABET)] for b in digest[:length])


def replicaset_name(seed: int, service: str) -> str:
    return f"{service}-{name_suffix(seed, service, 'rs', length=9)}"


def pod_name(seed: int, service: str) -> str:
    return f"{replicaset_name(seed, service)}-{name_suffix(seed, service, 'pod', length=5)}"
