from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional
import re

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
CERTIFICATE_SCHEMA_VERSION = "1.0"


class EquationKind(str, Enum):
    DIFFERENTIAL = "ode"
    DIFFERENCE = "diff"
    Q_DIFFERENCE = "qdiff"


class ProofStatus(str, Enum):
    PROVEN = "proven"
    INCONCLUSIVE = "inconclusive"
    FAILED = "failed"


class HRecurrenceSource(str, Enum):
    RICCATI = "riccati"
    ELIMINATION = "elimination"


class GuessConfig(BaseModel):
    """
    Caps and sizes of the guessing stages.
    Recorded in every certificate so guesses are reproducible.
    """
    N: int = Field(default=20, ge=4, description="Number of C-fraction terms used")
    L: int = Field(default=2, ge=1, le=4, description="Maximum period")
    max_num_deg: int = Field(default=4, ge=0, description="Numerator degree cap for rational interpolation")
    max_den_deg: int = Field(default=4, ge=0, description="Denominator degree cap for rational interpolation")
    rec_max_order: int = Field(default=6, ge=1, description="Order cap for recurrence guessing")
    rec_max_deg: int = Field(default=8, ge=0, description="Coefficient degree cap for recurrence guessing")
    verify_margin: int = Field(default=2, ge=2, description="Held-out points that must validate a guess")
    max_prefix: int = Field(default=3, ge=0, description="Longest exceptional prefix")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def check_enough_terms(self) -> "GuessConfig":
        if self.N < 2 * (self.max_num_deg + self.max_den_deg + 2):
            raise ValueError(
                f"N={self.N} is too small for degree caps {self.max_num_deg}/{self.max_den_deg}"
            )
        return self

    @classmethod
    def from_settings(cls, **overrides: Any) -> "GuessConfig":
        """Defaults from the application settings, then per-problem overrides."""
        from config.settings import get_settings

        settings = get_settings()
        values = {
            "N": settings.default_terms,
            "L": settings.default_period_max,
            "max_num_deg": settings.interp_max_num_deg,
            "max_den_deg": settings.interp_max_den_deg,
            "rec_max_order": settings.rec_max_order,
            "rec_max_deg": settings.rec_max_deg,
            "verify_margin": settings.verify_margin,
            "max_prefix": settings.max_prefix,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class ProblemOptions(BaseModel):
    """Per-problem overrides of the engine defaults."""
    terms: Optional[int] = Field(None, ge=4, description="Number of C-fraction terms (N)")
    period_max: Optional[int] = Field(None, ge=1, le=4, description="Maximum period (L)")
    h_count: Optional[int] = Field(None, ge=4, description="Number of H values (m)")
    truncation: Optional[int] = Field(None, ge=2, description="Series truncation order T")
    max_num_deg: Optional[int] = Field(None, ge=0)
    max_den_deg: Optional[int] = Field(None, ge=0)
    rec_max_order: Optional[int] = Field(None, ge=1)
    rec_max_deg: Optional[int] = Field(None, ge=0)
    verify_margin: Optional[int] = Field(None, ge=2)
    max_prefix: Optional[int] = Field(None, ge=0)

    model_config = ConfigDict(extra="forbid")

    def guess_overrides(self) -> Dict[str, Any]:
        return {
            "N": self.terms,
            "L": self.period_max,
            "max_num_deg": self.max_num_deg,
            "max_den_deg": self.max_den_deg,
            "rec_max_order": self.rec_max_order,
            "rec_max_deg": self.rec_max_deg,
            "verify_margin": self.verify_margin,
            "max_prefix": self.max_prefix,
        }


class ProblemSpec(BaseModel):
    """
    A problem file: one first-order equation and its expansion point data.
    """
    name: str = Field(default="problem", description="Problem name used in reports")
    kind: EquationKind = Field(..., description="ode, diff or qdiff")
    unknown: str = Field(default="y", description="Name of the unknown function")
    variable: str = Field(default="z", description="Name of the independent variable")
    parameters: List[str] = Field(default_factory=list, description="Symbolic parameters, in order")
    equation: str = Field(..., description="The equation in the input grammar")
    initial: str = Field(default="0", description="Value of the solution at the expansion point")
    step: int = Field(default=1, ge=1, description="Shift step of difference equations")
    leading: Optional[str] = Field(None, description="First series coefficient when not determined linearly")
    q: Optional[str] = Field(None, description="Dilation parameter of q-difference equations")
    options: ProblemOptions = Field(default_factory=ProblemOptions)

    model_config = ConfigDict(extra="forbid")

    @field_validator("unknown", "variable")
    @classmethod
    def check_identifier(cls, v: str) -> str:
        if not IDENTIFIER.match(v):
            raise ValueError(f"'{v}' is not an identifier")
        return v

    @field_validator("parameters")
    @classmethod
    def check_parameters(cls, v: List[str]) -> List[str]:
        for name in v:
            if not IDENTIFIER.match(name):
                raise ValueError(f"parameter '{name}' is not an identifier")
        if len(set(v)) != len(v):
            raise ValueError("parameters must be distinct")
        return v

    @model_validator(mode="after")
    def check_kind(self) -> "ProblemSpec":
        names = {self.unknown, self.variable}
        if len(names) != 2 or names & set(self.parameters):
            raise ValueError("unknown, variable and parameters must be distinct names")
        if self.kind == EquationKind.Q_DIFFERENCE:
            if self.q is None:
                self.q = "q"
            if self.q not in self.parameters:
                raise ValueError(f"q parameter '{self.q}' must be declared in parameters")
        elif self.q is not None:
            raise ValueError("q is only meaningful for qdiff problems")
        if self.kind != EquationKind.DIFFERENCE and self.step != 1:
            raise ValueError("step is only meaningful for diff problems")
        return self


# 证书文档相关的Pydantic模型

class OperatorDocument(BaseModel):
    """递推算子，系数 p_0..p_r 以规范字符串存储"""
    coefficients: List[str]
    order: int
    shift_action: Dict[str, str] = Field(default_factory=dict)


class TailDocument(BaseModel):
    residue: int = Field(..., description="余数 r，k = period*j + r")
    coefficient: str = Field(..., description="系数，子序列下标 n 的有理函数")
    exponent: int = Field(..., ge=1)


class CFracDocument(BaseModel):
    a0: str
    prefix: List[str] = Field(default_factory=list, description="显式给出的部分分子 a_1..a_p")
    period: int
    tail: List[TailDocument]


class VerdictDocument(BaseModel):
    status: ProofStatus
    gain: Optional[int] = Field(None, description="子序列每步的赋值增量 e")
    base: Optional[int] = Field(None, description="val H_(offset + period*k) >= e*k + beta 中的 beta")
    bound: Optional[str] = None
    reason: Optional[str] = None


class CertificateDocument(BaseModel):
    """
    自包含的证明证书，所有结论仅凭文档即可复核
    """
    schema_version: str = Field(default=CERTIFICATE_SCHEMA_VERSION)
    problem: ProblemSpec
    shift: str = Field(..., description="换元 Y -> a + Y 中的初值 a")
    cfrac: CFracDocument
    guess_config: GuessConfig
    subsequence_operators: List[OperatorDocument] = Field(default_factory=list)
    stride: int
    offset: int
    h_recurrence: OperatorDocument
    h_recurrence_source: HRecurrenceSource
    h_initials: List[str]
    index_set: List[int]
    reduced: OperatorDocument
    reduced_index_set: List[int]
    window: List[int]
    division_quotient: Optional[OperatorDocument] = Field(
        None, description="约化算子右整除大算子时的左商"
    )
    verdict: VerdictDocument
    diagnostics: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
    provenance: Dict[str, Any] = Field(default_factory=dict)
    created_at: datetime = Field(default_factory=datetime.now)


class FailReport(BaseModel):
    """流水线分阶段失败报告（不含结论）"""
    problem: str
    stage: str
    reason: str
    status: ProofStatus = ProofStatus.FAILED
    diagnostics: List[str] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)


class RecheckReport(BaseModel):
    """证书复核结果"""
    problem: str
    valid: bool
    failed_step: Optional[str] = None
    reason: Optional[str] = None
    steps: Dict[str, bool] = Field(default_factory=dict)


class CorpusRow(BaseModel):
    """语料汇总表中的一行"""
    name: str
    status: ProofStatus
    stage: Optional[str] = None
    guessed: Optional[str] = None
    reduced: Optional[str] = None
    bound: Optional[str] = None
    seconds: float = 0.0
