from fastapi import APIRouter, HTTPException, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.concurrency import run_in_threadpool

from app.models.requests import BesselRequest, Hyp2f1Request, LogGammaRequest
from app.models.responses import ComplexOut, ValueResponse
from app.services.specfun import bessel_j, bessel_k, default_accuracy, hyp2f1, log_gamma
from app.utils.errors import LabError, map_lab_error_to_http
import structlog

logger = structlog.get_logger()
router = APIRouter(prefix="/specfun", tags=["specfun"])
limiter = Limiter(key_func=get_remote_address)

@router.post("/log-gamma", response_model=ValueResponse)
@limiter.limit("100/minute")
async def evaluate_log_gamma(request: Request, body: LogGammaRequest):
    """Principal-branch log Gamma(z)"""
    try:
        value = log_gamma(body.z.value)
        return ValueResponse(success=True, value=ComplexOut.of(value))

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("log_gamma_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/bessel", response_model=ValueResponse)
@limiter.limit("100/minute")
async def evaluate_bessel(request: Request, body: BesselRequest):
    """J_alpha(x) for real alpha, or K_beta(x) for real or imaginary beta"""
    try:
        accuracy = default_accuracy(body.tol)
        if body.kind == "j":
            if body.order.im != 0:
                raise HTTPException(status_code=400, detail="OUT_OF_DOMAIN: J needs a real order")
            value = await run_in_threadpool(bessel_j, body.order.re, body.x, accuracy)
        else:
            value = await run_in_threadpool(bessel_k, body.order.value, body.x, accuracy)
        return ValueResponse(success=True, value=ComplexOut.of(value))

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("bessel_failed", error=message, kind=body.kind)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/hyp2f1", response_model=ValueResponse)
@limiter.limit("100/minute")
async def evaluate_hyp2f1(request: Request, body: Hyp2f1Request):
    """Gauss 2F1(a, b; c; x) for x <= 0"""
    try:
        value = await run_in_threadpool(
            hyp2f1, body.a.value, body.b.value, body.c.value, body.x, default_accuracy(body.tol)
        )
        return ValueResponse(success=True, value=ComplexOut.of(value))

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("hyp2f1_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)
