from fastapi import APIRouter, HTTPException, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.concurrency import run_in_threadpool

from app.models.requests import (
    DeltaTransformRequest,
    MellinPairRequest,
    PDERequest,
    SymmetryRequest,
    TSymmetryRequest,
)
from app.models.responses import (
    ComplexOut,
    IdentityResponse,
    PDEResponse,
    SymmetryPointOut,
    SymmetryResponse,
)
from app.services import converse
from app.utils.errors import LabError, map_lab_error_to_http
import structlog

logger = structlog.get_logger()
router = APIRouter(prefix="/converse", tags=["converse"])
limiter = Limiter(key_func=get_remote_address)

def _identity(lhs: complex, rhs: complex, difference: complex) -> IdentityResponse:
    return IdentityResponse(
        success=True,
        lhs=ComplexOut.of(lhs),
        rhs=ComplexOut.of(rhs),
        difference=abs(difference),
    )

def _symmetry(body: SymmetryRequest) -> SymmetryResponse:
    report = converse.symmetry_report(body.params.build(), body.rs, body.thetas)
    return SymmetryResponse(
        success=True,
        max_residual=report.max_residual,
        tolerance=body.tol,
        passed=report.max_residual <= body.tol,
        points=[
            SymmetryPointOut(
                r=p.r,
                theta=p.theta,
                inner=ComplexOut.of(p.inner),
                outer=ComplexOut.of(p.outer),
                residual=p.residual,
                terms=p.terms,
            )
            for p in report.points
        ],
    )

@router.post("/symmetry", response_model=SymmetryResponse)
@limiter.limit("10/minute")
async def check_symmetry(request: Request, body: SymmetryRequest):
    """f(r e^(i theta)) against conj f(r^-1 e^(i theta)) on a grid"""
    try:
        return await run_in_threadpool(_symmetry, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("symmetry_check_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/mellin-pair", response_model=IdentityResponse)
@limiter.limit("20/minute")
async def check_mellin_pair(request: Request, body: MellinPairRequest):
    """Mellin transform of J_alpha(a u) K_beta(b u): quadrature against the 2F1 closed form"""
    try:
        result = await run_in_threadpool(
            converse.mellin_pair_check, body.alpha, body.beta.value, body.a, body.b, body.s.value
        )
        return _identity(*result)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("mellin_pair_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/t-symmetry", response_model=IdentityResponse)
@limiter.limit("100/minute")
async def check_t_symmetry(request: Request, body: TSymmetryRequest):
    """T(s) against T(1 - s)"""
    try:
        return _identity(*converse.t_symmetry_check(body.alpha, body.beta.value, body.theta, body.s.value))

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("t_symmetry_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/delta-transform", response_model=IdentityResponse)
@limiter.limit("100/minute")
async def check_delta_transform(request: Request, body: DeltaTransformRequest):
    """Delta(iy) against y^-12 Delta(i/y)"""
    try:
        return _identity(*await run_in_threadpool(converse.delta_transform_check, body.y))

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("delta_transform_failed", error=message, y=body.y)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/pde", response_model=PDEResponse)
@limiter.limit("20/minute")
async def check_pde(request: Request, body: PDERequest):
    """5-point residual of f_xx + f_yy = ((alpha^2-1/4)/x^2 + (beta^2-1/4)/y^2) f"""
    try:
        residual = await run_in_threadpool(
            converse.pde_residual, body.params.build(), body.x, body.y, body.h
        )
        return PDEResponse(success=True, residual=residual)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("pde_check_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)
