"""Tests for the in-memory TTL cache."""

import time

from app.core import cache


def test_put_and_get():
    cache.clear()
    cache.put(("sweep", "a"), [1, 2])
    assert cache.get(("sweep", "a")) == [1, 2]
    cache.invalidate(("sweep", "a"))
    assert cache.get(("sweep", "a")) is None


def test_put_purges_expired_entries():
    cache.clear()
    cache._cache[("sweep", "old")] = (time.monotonic() - 1000, "stale")
    cache.put(("sweep", "fresh"), "value", ttl=10)
    assert ("sweep", "old") not in cache._cache
    assert cache.get(("sweep", "fresh"), ttl=10) == "value"
    cache.clear()


def test_get_expires_entry():
    cache.clear()
    cache._cache["k"] = (time.monotonic() - 20, "v")
    assert cache.get("k", ttl=10) is None
    assert "k" not in cache._cache
