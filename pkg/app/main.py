from fastapi import FastAPI, Request, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from contextlib import asynccontextmanager
from slowapi import Limiter, _rate_limit_exceeded_handler
from slowapi.util import get_remote_address
from slowapi.errors import RateLimitExceeded
import structlog

from app.config import settings
from app.middleware.correlation import CorrelationMiddleware
from app.services.primes import prime_table, verify_prime_table
from app.utils.logging import configure_logging

# Import all routers
from app.routes import converse, degree, fe, functions, specfun, stats

configure_logging()

logger = structlog.get_logger()

# prime table warmed at startup
WARM_PRIME_LIMIT = 100_000

@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan events"""
    # Startup
    logger.info("application_starting", environment=settings.ENVIRONMENT)
    table = prime_table(WARM_PRIME_LIMIT)
    if not verify_prime_table(table):
        logger.warning("prime_table_mismatch", limit=WARM_PRIME_LIMIT)
    logger.info("application_started", primes=len(table.primes))

    yield

    # Shutdown
    logger.info("application_stopped")

# Create FastAPI app
app = FastAPI(
    title=settings.PROJECT_NAME,
    version=settings.API_VERSION,
    description="""Numerical laboratory for the Selberg class of Dirichlet series.

Every value is computed in double precision with an explicit truncation bound;
requests that cannot be certified are refused with 422.

## Key Features
- Special functions: complex log-gamma, Bessel J and K, Gauss 2F1
- Builtin L-functions (zeta, Dirichlet L, Ramanujan Delta) and user candidates
- Functional-equation residual by inverse Mellin transform on a vertical line
- Prime-sum statistics and n_F estimation
- Degree gate: decay profiles, Euler-factor roots, degree-0 constraints
- GL(2) converse checks: Bessel-series symmetry, Mellin identities, PDE residual""",
    docs_url="/docs" if settings.ENABLE_DOCS else None,
    redoc_url="/redoc" if settings.ENABLE_DOCS else None,
    openapi_url="/openapi.json" if settings.ENABLE_DOCS else None,
    license_info={"name": "MIT"},
    lifespan=lifespan
)

# Configure rate limiter with in-process storage
limiter = Limiter(
    key_func=get_remote_address,
    storage_uri=settings.RATE_LIMIT_STORAGE_URI,
    enabled=settings.RATE_LIMIT_ENABLED
)
app.state.limiter = limiter
app.add_exception_handler(RateLimitExceeded, _rate_limit_exceeded_handler)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=False,
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

# Add correlation ID middleware
app.add_middleware(CorrelationMiddleware)

# Global exception handler for unexpected errors
@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Anything that is not a LabError lands here as a 500"""
    logger.exception(
        "unhandled_exception",
        error=str(exc),
        error_type=type(exc).__name__,
        path=request.url.path,
        method=request.method
    )
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"detail": "Internal server error occurred"}
    )

# Health check endpoint
@app.get("/health")
async def health_check():
    """Health check endpoint"""
    health_status = {"status": "ok", "service": "selberg-lab", "version": settings.API_VERSION}

    try:
        # pi(10^5) = 9592
        table = prime_table(WARM_PRIME_LIMIT)
        health_status["primes"] = "ok" if table.count(WARM_PRIME_LIMIT) == 9592 else "mismatch"
    except Exception as e:
        health_status["primes"] = f"error: {str(e)}"
    if health_status["primes"] != "ok":
        health_status["status"] = "degraded"

    return health_status

# All verification families share the lab prefix
for module in (functions, specfun, fe, stats, degree, converse):
    app.include_router(module.router, prefix=settings.API_V1_PREFIX)

if __name__ == "__main__":
    import uvicorn
    uvicorn.run(
        "app.main:app",
        host="0.0.0.0",
        port=8000,
        reload=settings.DEBUG
    )
