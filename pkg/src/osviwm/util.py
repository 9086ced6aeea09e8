"""Small shared helpers."""
from __future__ import annotations

import hashlib


def seed_from(*parts) -> int:
    """Stable 64-bit seed derived from arbitrary hashable parts.

    Python's hash() is salted per process; this must survive process
    boundaries so datasets regenerate byte-identically.
    """
    h = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(h[:8], "little")
