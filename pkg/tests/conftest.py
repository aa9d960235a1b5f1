"""Shared test fixtures: HTTP test client and small session configs."""

from collections.abc import AsyncGenerator

import numpy as np
import pytest
from httpx import ASGITransport, AsyncClient

from app.core import cache
from app.main import app
from app.services.protocol import SessionConfig


@pytest.fixture
async def client() -> AsyncGenerator[AsyncClient, None]:
    """HTTPX async test client over the ASGI app."""
    cache.clear()
    transport = ASGITransport(app=app)
    async with AsyncClient(transport=transport, base_url="http://test") as ac:
        yield ac
    cache.clear()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def small_config() -> SessionConfig:
    return SessionConfig(participants=3, secret_len=8, decoys=8, seed=7)
