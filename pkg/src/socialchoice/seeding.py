"""Deterministic seed derivation so parallel and sequential runs agree."""

from __future__ import annotations

import hashlib

_SEPARATOR = "\x1f"


def derive_seed(master: int, *parts: object) -> int:
    """Hash (master, *parts) into an independent 63-bit stream seed.

    Evaluation order must never matter: every consumer of randomness asks for
    its own stream by name instead of advancing a shared generator.
    """
    payload = _SEPARATOR.join([str(int(master)), *(str(p) for p in parts)])
    digest = hashlib.sha256(payload.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") >> 1
