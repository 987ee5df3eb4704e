import cmath
import dataclasses

from fastapi import APIRouter, HTTPException, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.concurrency import run_in_threadpool

from app.models.requests import FECheckRequest
from app.models.responses import ComplexOut, FECheckResponse, FEPoint
from app.services.lfunc import fe_residual_report
from app.utils.errors import CannotCertifyError, LabError, map_lab_error_to_http
import structlog

logger = structlog.get_logger()
router = APIRouter(prefix="/fe", tags=["functional-equation"])
limiter = Limiter(key_func=get_remote_address)

def _check(body: FECheckRequest) -> FECheckResponse:
    F = body.function.build()
    if body.epsilon_phase:
        if F.gamma is None:
            raise CannotCertifyError(f"{F.name} has no gamma factor")
        F = dataclasses.replace(F, gamma=F.gamma.rotated(cmath.exp(1j * body.epsilon_phase)))
    points = []
    for x in body.xs:
        r = fe_residual_report(F, x)
        size = abs(r.residual)
        points.append(FEPoint(
            x=x,
            residual=ComplexOut.of(r.residual),
            abs_residual=size,
            direct=ComplexOut.of(r.direct),
            reflected=ComplexOut.of(r.reflected),
            residues=ComplexOut.of(r.residues),
            error_bound=r.error,
            passed=size <= body.tol,
        ))
    worst = max(p.abs_residual for p in points)
    logger.info("fe_check_completed", function=F.name, max_residual=worst, points=len(points))
    return FECheckResponse(
        success=True,
        function=F.name,
        max_residual=worst,
        tolerance=body.tol,
        points=points,
    )

@router.post("/residual", response_model=FECheckResponse)
@limiter.limit("20/minute")
async def check_functional_equation(request: Request, body: FECheckRequest):
    """S_F(x) - R(x) - S_Fbar(1/x)/x over a grid of x"""
    try:
        return await run_in_threadpool(_check, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("fe_check_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)
