import pytest
from httpx import AsyncClient

class TestHealthEndpoint:
    """Tests for health check endpoint"""

    @pytest.mark.asyncio
    async def test_health_check(self, client: AsyncClient):
        """Test health check endpoint returns OK"""
        response = await client.get("/health")
        assert response.status_code == 200
        data = response.json()
        assert "status" in data
        assert data["status"] in ["ok", "degraded"]
        assert "service" in data
        assert data["service"] == "selberg-lab"
        assert data["primes"] == "ok"

    @pytest.mark.asyncio
    async def test_trace_id_echoed(self, client: AsyncClient):
        """Test correlation middleware echoes the trace id and reports elapsed time"""
        response = await client.get("/health", headers={"X-Trace-ID": "trace-123"})
        assert response.headers["X-Trace-ID"] == "trace-123"
        assert float(response.headers["X-Elapsed-Ms"]) >= 0.0
