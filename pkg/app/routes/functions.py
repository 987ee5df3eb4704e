from fastapi import APIRouter, HTTPException, Request
from slowapi import Limiter
from slowapi.util import get_remote_address
from starlette.concurrency import run_in_threadpool

from app.models.requests import AxiomsRequest, EvaluateRequest
from app.models.responses import (
    AxiomCheckOut,
    AxiomsResponse,
    BuiltinInfo,
    CharacterInfo,
    ComplexOut,
    EvaluateResponse,
    ListBuiltinsResponse,
    ListCharactersResponse,
)
from app.services.characters import enumerate_characters
from app.services.lfunc import axiom_audit, completed_phi, dirichlet_eval, list_builtins
from app.services.specfun import default_accuracy
from app.utils.errors import LabError, map_lab_error_to_http
import structlog

logger = structlog.get_logger()
router = APIRouter(prefix="", tags=["functions"])
limiter = Limiter(key_func=get_remote_address)

@router.get("/builtins", response_model=ListBuiltinsResponse)
@limiter.limit("100/minute")
async def get_builtins(request: Request):
    """Builtin Selberg-class functions"""
    return ListBuiltinsResponse(
        success=True,
        builtins=[BuiltinInfo(**b) for b in list_builtins()],
    )

@router.get("/characters/{modulus}", response_model=ListCharactersResponse)
@limiter.limit("30/minute")
async def get_characters(request: Request, modulus: int):
    """All Dirichlet characters mod q, indexed as the dirichlet builtin expects"""
    try:
        characters = await run_in_threadpool(enumerate_characters, modulus)
        return ListCharactersResponse(
            success=True,
            modulus=modulus,
            characters=[
                CharacterInfo(
                    label=chi.label(),
                    modulus=chi.modulus,
                    conductor=chi.conductor,
                    primitive=chi.primitive,
                    parity=chi.parity,
                    order=chi.order,
                )
                for chi in characters
            ],
        )

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("list_characters_failed", error=message, modulus=modulus)
        raise HTTPException(status_code=status_code, detail=message)

def _evaluate(body: EvaluateRequest) -> EvaluateResponse:
    F = body.function.build()
    accuracy = default_accuracy(body.tol)
    value = dirichlet_eval(F, body.s.value, accuracy)
    completed = completed_phi(F, body.s.value, accuracy) if F.gamma is not None else None
    return EvaluateResponse(
        success=True,
        function=F.name,
        dirichlet=ComplexOut.of(value.value),
        terms=value.terms,
        error_bound=value.bound,
        completed=ComplexOut.of(completed) if completed is not None else None,
    )

@router.post("/functions/evaluate", response_model=EvaluateResponse)
@limiter.limit("60/minute")
async def evaluate_function(request: Request, body: EvaluateRequest):
    """F(s) and Phi(s) = gamma(s) F(s) in the half-plane of absolute convergence"""
    try:
        return await run_in_threadpool(_evaluate, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("evaluate_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)

def _audit(body: AxiomsRequest) -> AxiomsResponse:
    F = body.function.build(body.N)
    report = axiom_audit(F, body.N)
    return AxiomsResponse(
        success=True,
        function=report.name,
        N=report.N,
        degree=report.degree,
        admissible=report.admissible,
        checks=[AxiomCheckOut(**vars(c)) for c in report.checks],
    )

@router.post("/functions/axioms", response_model=AxiomsResponse)
@limiter.limit("30/minute")
async def audit_axioms(request: Request, body: AxiomsRequest):
    """Axiom audit on the realized coefficients"""
    try:
        return await run_in_threadpool(_audit, body)

    except LabError as e:
        status_code, message = map_lab_error_to_http(str(e))
        logger.error("axiom_audit_failed", error=message)
        raise HTTPException(status_code=status_code, detail=message)
