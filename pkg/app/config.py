from pydantic_settings import BaseSettings
from typing import List, Optional

class Settings(BaseSettings):
    # Environment
    ENVIRONMENT: str = "development"
    DEBUG: bool = False

    # API
    API_V1_PREFIX: str = "/lab"
    PROJECT_NAME: str = "Selberg Lab API"

    # API Documentation (Swagger UI / OpenAPI)
    ENABLE_DOCS: bool = True
    API_VERSION: str = "1.0.0"

    # Rate Limiting (in-process storage)
    RATE_LIMIT_ENABLED: bool = True
    RATE_LIMIT_STORAGE_URI: str = "memory://"

    # CORS
    CORS_ORIGINS: List[str] = ["*"]

    # Logging
    LOG_LEVEL: str = "INFO"

    # Accuracy contract
    ABS_TOL: float = 1e-12
    REL_TOL: float = 1e-11
    MAX_TERMS: int = 2_000_000

    # Dirichlet series: evaluate only on Re s >= 1 + DIRICHLET_DELTA
    DIRICHLET_DELTA: float = 0.5

    # Vertical-line quadrature
    QUAD_STEP: float = 0.05
    STIRLING_ENVELOPE_SAFETY: float = 4.0

    # Bessel kernels
    BESSEL_SWITCH_MIN: float = 12.0
    BESSEL_K_CUTOFF: float = 40.0
    MIN_Y: float = 1e-3

    # Polynomial root finding
    ROOT_MAX_ITER: int = 500
    ROOT_RESTARTS: int = 8
    ROOT_SEED: int = 20240501

    # CLI artifacts
    OUTPUT_DIR: Optional[str] = None

    class Config:
        env_file = ".env"
        case_sensitive = True

settings = Settings()
