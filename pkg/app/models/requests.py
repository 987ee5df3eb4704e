from pydantic import BaseModel, Field, model_validator
from typing import List, Optional, Tuple

from app.services.config_parser import parse_config
from app.services.converse import GL2Params, delta_params
from app.services.lfunc import DEFAULT_REALIZATION, SelbergFunction, builtin
from app.utils.errors import ConfigError

# Scalars
class ComplexIn(BaseModel):
    re: float
    im: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

# Candidate functions
class FunctionSpec(BaseModel):
    """A builtin tag or the text of a candidate description file"""
    builtin: Optional[str] = Field(None, pattern="^(zeta|dirichlet|delta|counterexample)$")
    modulus: Optional[int] = Field(None, ge=1, le=100_000)
    index: Optional[int] = Field(None, ge=0)
    N: int = Field(DEFAULT_REALIZATION, ge=1, le=2_000_000)
    config: Optional[str] = Field(None, max_length=200_000)

    @model_validator(mode="after")
    def one_source(self) -> "FunctionSpec":
        if (self.builtin is None) == (self.config is None):
            raise ValueError("give exactly one of builtin or config")
        return self

    def build(self, N: Optional[int] = None) -> SelbergFunction:
        if self.config is not None:
            parsed = parse_config(self.config)
            if not isinstance(parsed, SelbergFunction):
                raise ConfigError("expected a [function] section")
            return parsed
        return builtin(self.builtin, max(self.N, N or 0), self.modulus, self.index)

class EvaluateRequest(BaseModel):
    function: FunctionSpec
    s: ComplexIn
    tol: Optional[float] = Field(None, gt=0)

class AxiomsRequest(BaseModel):
    function: FunctionSpec
    N: Optional[int] = Field(None, ge=2)

# Special functions
class LogGammaRequest(BaseModel):
    z: ComplexIn

class BesselRequest(BaseModel):
    kind: str = Field(..., pattern="^(j|k)$")
    order: ComplexIn
    x: float = Field(..., gt=0)
    tol: Optional[float] = Field(None, gt=0)

class Hyp2f1Request(BaseModel):
    a: ComplexIn
    b: ComplexIn
    c: ComplexIn
    x: float = Field(..., le=0)
    tol: Optional[float] = Field(None, gt=0)

# Functional equation
class FECheckRequest(BaseModel):
    function: FunctionSpec
    xs: List[float] = Field(default_factory=lambda: [0.7, 1.0, 1.4], min_length=1, max_length=50)
    tol: float = Field(1e-8, gt=0)
    # multiply epsilon by exp(i phase) before checking
    epsilon_phase: float = 0.0

# Prime statistics
class NFRequest(BaseModel):
    function: FunctionSpec
    X: float = Field(1e6, ge=1000, le=2_000_000)

class SelbergSumRequest(BaseModel):
    function: FunctionSpec
    checkpoints: List[float] = Field(..., min_length=1, max_length=200)
    kind: str = Field("selberg", pattern="^(selberg|pole_divergence)$")
    alpha: float = 0.0

class OrthogonalityRequest(BaseModel):
    function: FunctionSpec
    other: FunctionSpec
    checkpoints: List[float] = Field(..., min_length=1, max_length=200)

# Degree gate
class DegreeAuditRequest(BaseModel):
    function: FunctionSpec
    prime_limit: int = Field(50, ge=2, le=10_000)

class LocalRootsRequest(BaseModel):
    p: int = Field(..., ge=2)
    coefficients: List[ComplexIn] = Field(..., min_length=1, max_length=64)
    J: int = Field(100, ge=1, le=10_000)

class DecayRequest(BaseModel):
    d: float = Field(..., gt=0)
    Q: float = Field(1.0, gt=0)
    mu: float = Field(0.25, ge=0)
    N: int = Field(200, ge=20, le=2_000)

class DegreeZeroRequest(BaseModel):
    Q: float = Field(..., gt=0)
    coefficients: List[Tuple[int, ComplexIn]] = Field(..., min_length=1)
    epsilon: Optional[ComplexIn] = None

# Converse theorem
class GL2Spec(BaseModel):
    builtin: Optional[str] = Field(None, pattern="^delta$")
    alpha: Optional[float] = Field(None, ge=-0.5)
    beta: ComplexIn = ComplexIn(re=0.5)
    q: float = Field(1.0, gt=0)
    coefficients: Optional[List[ComplexIn]] = Field(None, min_length=1)
    ramanujan: Tuple[float, float] = (1.0, 0.0)
    finite: bool = False
    N: int = Field(512, ge=1, le=1 << 20)

    @model_validator(mode="after")
    def one_source(self) -> "GL2Spec":
        if self.builtin is None and (self.alpha is None or self.coefficients is None):
            raise ValueError("give builtin or both alpha and coefficients")
        return self

    def build(self) -> GL2Params:
        if self.builtin is not None:
            return delta_params(self.N)
        return GL2Params(
            self.alpha, self.beta.value, self.q,
            tuple(c.value for c in self.coefficients),
            self.ramanujan[0], self.ramanujan[1], self.finite,
        )

class SymmetryRequest(BaseModel):
    params: GL2Spec
    rs: List[float] = Field(default_factory=lambda: [1.2, 2.0, 3.0], min_length=1, max_length=50)
    thetas: List[float] = Field(default_factory=lambda: [0.5235987755982988, 0.7853981633974483, 1.0471975511965976],
                                min_length=1, max_length=50)
    tol: float = Field(1e-8, gt=0)

class MellinPairRequest(BaseModel):
    alpha: float = Field(..., ge=-0.5)
    beta: ComplexIn
    a: float = Field(..., gt=0)
    b: float = Field(..., gt=0)
    s: ComplexIn

class TSymmetryRequest(BaseModel):
    alpha: float = Field(..., ge=-0.5)
    beta: ComplexIn
    theta: float = Field(..., gt=0, lt=1.5707963267948966)
    s: ComplexIn

class DeltaTransformRequest(BaseModel):
    y: float = Field(..., gt=0)

class PDERequest(BaseModel):
    params: GL2Spec
    x: float = Field(..., gt=0)
    y: float = Field(..., gt=0)
    h: float = Field(1e-2, gt=0)
