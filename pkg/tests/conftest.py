import pytest
import asyncio
from httpx import AsyncClient
from app.main import app
from app.services import lfunc
from app.services.characters import character

@pytest.fixture(scope="session")
def event_loop():
    """Create event loop for async tests"""
    loop = asyncio.get_event_loop_policy().new_event_loop()
    yield loop
    loop.close()

@pytest.fixture
async def client():
    """Create test client"""
    async with AsyncClient(app=app, base_url="http://test") as ac:
        yield ac

@pytest.fixture(scope="session")
def zeta():
    """Riemann zeta realized to 10^4 terms"""
    return lfunc.zeta(10_000)

@pytest.fixture(scope="session")
def chi3():
    """The odd primitive character mod 3"""
    return character(3, 1)

@pytest.fixture(scope="session")
def chi4():
    """The odd primitive character mod 4"""
    return character(4, 1)

@pytest.fixture(scope="session")
def delta():
    """Normalized Delta L-function realized to 10^4 terms"""
    return lfunc.delta(10_000)
