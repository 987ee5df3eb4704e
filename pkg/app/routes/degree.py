from fastapi import APIRouter, HTTPException, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.concurrency import run_in_threadpool

from app.models.requests import DecayRequest, DegreeAuditRequest, DegreeZeroRequest, LocalRootsRequest
from app.models.responses import (
    ComplexOut,
    DecayResponse,
    DegreeAuditResponse,
    DegreeZeroResponse,
    LocalRootsResponse,
    ThetaVerdictOut,
)
from app.services import degree_gate
from app.utils.errors import LabError, map_lab_error_to_http
import structlog

logger = structlog.get_logger()
router = APIRouter(prefix="/degree", tags=["degree"])
limiter = Limiter(key_func=get_remote_address)

def _verdict(v: degree_gate.ThetaVerdict) -> ThetaVerdictOut:
    return ThetaVerdictOut(p=v.p, theta=v.theta, admissible=v.admissible)

def _audit(body: DegreeAuditRequest) -> DegreeAuditResponse:
    F = body.function.build()
    report = degree_gate.degree_gate_report(F, prime_limit=body.prime_limit)
    return DegreeAuditResponse(
        success=True,
        function=report.name,
        degree=report.degree,
        decay_exponent=report.decay.exponent if report.decay is not None else None,
        theta_admissible=report.theta_admissible,
        verdicts=[_verdict(v) for v in report.verdicts],
        unverifiable=report.unverifiable,
        q_bound_status=report.q_bound.status if report.q_bound is not None else None,
    )

@router.post("/audit", response_model=DegreeAuditResponse)
@limiter.limit("20/minute")
async def degree_audit(request: Request, body: DegreeAuditRequest):
    """Gamma decay profile plus theta verdicts for the small Euler factors"""
    try:
        return await run_in_threadpool(_audit, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("degree_audit_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/local-roots", response_model=LocalRootsResponse)
@limiter.limit("100/minute")
async def local_roots(request: Request, body: LocalRootsRequest):
    """Inverse roots of a local polynomial, B_j growth and the theta it forces"""
    try:
        factor = degree_gate.local_roots([c.value for c in body.coefficients], body.p)
        growth = degree_gate.bj_growth(factor, body.J)
        return LocalRootsResponse(
            success=True,
            roots=[ComplexOut.of(r) for r in factor.roots],
            max_modulus=factor.max_modulus,
            dominant=factor.dominant,
            bj_limsup=growth.limsup,
            verdict=_verdict(degree_gate.theta_requirement(factor)),
        )

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("local_roots_failed", error=message, p=body.p)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/decay", response_model=DecayResponse)
@limiter.limit("100/minute")
async def decay_profile(request: Request, body: DecayRequest):
    """Decay exponent of the K(x) coefficients for a synthetic degree-d gamma factor"""
    try:
        profile = degree_gate.k_decay_profile(degree_gate.gamma_family(body.d, body.Q, body.mu), None, body.N)
        return DecayResponse(success=True, exponent=profile.exponent, excluded=profile.excluded)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("decay_profile_failed", error=message, d=body.d)
        raise HTTPException(status_code=status_code, detail=message)

@router.post("/zero", response_model=DegreeZeroResponse)
@limiter.limit("100/minute")
async def degree_zero(request: Request, body: DegreeZeroRequest):
    """Constraints on a degree-0 candidate sum a_n n^-s"""
    try:
        report = degree_gate.degree_zero_constraints(
            body.Q,
            {n: c.value for n, c in body.coefficients},
            body.epsilon.value if body.epsilon is not None else None,
        )
        return DegreeZeroResponse(
            success=True,
            consistent=report.consistent,
            admissible=report.admissible,
            q_squared=report.q_squared,
            support_violations=report.support_violations,
            matching_violations=report.matching_violations,
            verdicts=[_verdict(v) for v in report.verdicts],
        )

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("degree_zero_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)
