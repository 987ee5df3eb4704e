from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request
import structlog
import time
import uuid

class CorrelationMiddleware(BaseHTTPMiddleware):
    """Add correlation ID and elapsed time to all requests"""

    async def dispatch(self, request: Request, call_next):
        # Get correlation ID from header or generate new one
        correlation_id = request.headers.get("X-Trace-ID") or str(uuid.uuid4())

        # Bind to structlog context
        structlog.contextvars.clear_contextvars()
        structlog.contextvars.bind_contextvars(correlation_id=correlation_id)

        started = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - started) * 1000.0

        response.headers["X-Trace-ID"] = correlation_id
        response.headers["X-Elapsed-Ms"] = f"{elapsed_ms:.1f}"

        return response
