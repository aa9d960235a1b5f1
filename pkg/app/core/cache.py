"""Lightweight in-memory TTL cache for expensive, deterministic results.

Sweeps and exact oracles are pure functions of their inputs (seed included),
so identical requests within the TTL window return the stored result instead
of re-running thousands of sessions.
"""

import time
from collections.abc import Hashable
from typing import Any

from app.core.config import get_settings

_cache: dict[Hashable, tuple[float, Any]] = {}


def _ttl(ttl: float | None) -> float:
    return get_settings().cache_ttl_seconds if ttl is None else ttl


def get(key: Hashable, ttl: float | None = None) -> Any | None:
    """Return cached value if present and not expired, else None."""
    entry = _cache.get(key)
    if entry is None:
        return None
    stored_at, value = entry
    if time.monotonic() - stored_at > _ttl(ttl):
        _cache.pop(key, None)
        return None
    return value


def put(key: Hashable, value: Any, ttl: float | None = None) -> None:
    """Store a value in the cache, dropping every entry that has expired."""
    now = time.monotonic()
    limit = _ttl(ttl)
    for stale in [k for k, (stored_at, _) in _cache.items() if now - stored_at > limit]:
        del _cache[stale]
    _cache[key] = (now, value)


def invalidate(key: Hashable) -> None:
    """Remove a specific cache entry."""
    _cache.pop(key, None)


def clear() -> None:
    """Clear all cached entries."""
    _cache.clear()
