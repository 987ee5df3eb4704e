from pydantic import BaseModel
from typing import Dict, List, Optional

# Scalars
class ComplexOut(BaseModel):
    re: float
    im: float

    @classmethod
    def of(cls, z: complex) -> "ComplexOut":
        z = complex(z)
        return cls(re=z.real, im=z.imag)

# Builtins and characters
class BuiltinInfo(BaseModel):
    name: str
    description: str

class ListBuiltinsResponse(BaseModel):
    success: bool
    builtins: List[BuiltinInfo]

class CharacterInfo(BaseModel):
    label: str
    modulus: int
    conductor: int
    primitive: bool
    parity: int
    order: int

class ListCharactersResponse(BaseModel):
    success: bool
    modulus: int
    characters: List[CharacterInfo]

# Special functions
class ValueResponse(BaseModel):
    success: bool
    value: ComplexOut

# Candidate functions
class EvaluateResponse(BaseModel):
    success: bool
    function: str
    dirichlet: ComplexOut
    terms: int
    error_bound: float
    completed: Optional[ComplexOut]

class AxiomCheckOut(BaseModel):
    axiom: str
    passed: Optional[bool]
    witness: Optional[int]
    detail: str

class AxiomsResponse(BaseModel):
    success: bool
    function: str
    N: int
    degree: Optional[float]
    admissible: bool
    checks: List[AxiomCheckOut]

# Functional equation
class FEPoint(BaseModel):
    x: float
    residual: ComplexOut
    abs_residual: float
    direct: ComplexOut
    reflected: ComplexOut
    residues: ComplexOut
    error_bound: float
    passed: bool

class FECheckResponse(BaseModel):
    success: bool
    function: str
    max_residual: float
    tolerance: float
    points: List[FEPoint]

# Prime statistics
class SeriesPoint(BaseModel):
    x: float
    value: ComplexOut
    loglog_x: Optional[float]

class SeriesResponse(BaseModel):
    success: bool
    kind: str
    points: List[SeriesPoint]

class NFResponse(BaseModel):
    success: bool
    function: str
    slope: float
    intercept: float
    nearest_integer: int
    distance: float
    residual_rms: float
    points: List[SeriesPoint]

# Degree gate
class ThetaVerdictOut(BaseModel):
    p: int
    theta: float
    admissible: bool

class DegreeAuditResponse(BaseModel):
    success: bool
    function: str
    degree: Optional[float]
    decay_exponent: Optional[float]
    theta_admissible: bool
    verdicts: List[ThetaVerdictOut]
    unverifiable: List[int]
    q_bound_status: Optional[str]

class LocalRootsResponse(BaseModel):
    success: bool
    roots: List[ComplexOut]
    max_modulus: float
    dominant: bool
    bj_limsup: float
    verdict: ThetaVerdictOut

class DecayResponse(BaseModel):
    success: bool
    exponent: Optional[float]
    excluded: Dict[int, str]

class DegreeZeroResponse(BaseModel):
    success: bool
    consistent: bool
    admissible: bool
    q_squared: int
    support_violations: List[int]
    matching_violations: List[int]
    verdicts: List[ThetaVerdictOut]

# Converse theorem
class SymmetryPointOut(BaseModel):
    r: float
    theta: float
    inner: ComplexOut
    outer: ComplexOut
    residual: float
    terms: int

class SymmetryResponse(BaseModel):
    success: bool
    max_residual: float
    tolerance: float
    passed: bool
    points: List[SymmetryPointOut]

class IdentityResponse(BaseModel):
    success: bool
    lhs: ComplexOut
    rhs: ComplexOut
    difference: float

class PDEResponse(BaseModel):
    success: bool
    residual: float
