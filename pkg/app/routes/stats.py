from fastapi import APIRouter, HTTPException, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.concurrency import run_in_threadpool
from typing import List
import math

from app.models.requests import NFRequest, OrthogonalityRequest, SelbergSumRequest
from app.models.responses import ComplexOut, NFResponse, SeriesPoint, SeriesResponse
from app.services import stats
from app.utils.errors import LabError, map_lab_error_to_http
import structlog

logger = structlog.get_logger()
router = APIRouter(prefix="/stats", tags=["stats"])
limiter = Limiter(key_func=get_remote_address)

def _points(series: stats.StatSeries) -> List[SeriesPoint]:
    return [
        SeriesPoint(x=x, value=ComplexOut(re=re, im=im), loglog_x=None if math.isnan(ll) else ll)
        for x, re, im, ll in series.rows()
    ]

def _nf(body: NFRequest) -> NFResponse:
    F = body.function.build(int(body.X))
    estimate = stats.estimate_nF(F, body.X)
    return NFResponse(
        success=True,
        function=F.name,
        slope=estimate.slope,
        intercept=estimate.intercept,
        nearest_integer=estimate.nearest_integer,
        distance=estimate.distance,
        residual_rms=estimate.residual_rms,
        points=_points(estimate.series),
    )

@router.post("/nf", response_model=NFResponse)
@limiter.limit("10/minute")
async def estimate_nf(request: Request, body: NFRequest):
    """Slope of sum |a_p|^2/p against log log x on [sqrt X, X]"""
    try:
        return await run_in_threadpool(_nf, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("estimate_nf_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

def _sum(body: SelbergSumRequest) -> SeriesResponse:
    F = body.function.build(int(max(body.checkpoints)))
    if body.kind == "selberg":
        series = stats.selberg_sum(F, body.checkpoints)
    else:
        series = stats.pole_divergence_sum(F, body.alpha, body.checkpoints)
    return SeriesResponse(success=True, kind=series.kind, points=_points(series))

@router.post("/sum", response_model=SeriesResponse)
@limiter.limit("30/minute")
async def prime_sum(request: Request, body: SelbergSumRequest):
    """Cumulative prime sum at the given checkpoints"""
    try:
        return await run_in_threadpool(_sum, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("prime_sum_failed", error=message, kind=body.kind)
        raise HTTPException(status_code=status_code, detail=message)

def _orthogonality(body: OrthogonalityRequest) -> SeriesResponse:
    top = int(max(body.checkpoints))
    series = stats.orthogonality_sum(body.function.build(top), body.other.build(top), body.checkpoints)
    return SeriesResponse(success=True, kind=series.kind, points=_points(series))

@router.post("/orthogonality", response_model=SeriesResponse)
@limiter.limit("30/minute")
async def orthogonality(request: Request, body: OrthogonalityRequest):
    """sum a_p(F) conj(a_p(G)) / p at the given checkpoints"""
    try:
        return await run_in_threadpool(_orthogonality, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("orthogonality_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)
