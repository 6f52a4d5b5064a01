# schemas.py (Pydantic v2)
from enum import Enum
from typing import Any, List, Literal, Optional, Tuple, Union

import gmpy2
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from config import DEFAULT_PRECISION_BITS, MAX_ITER_CAP, MAX_PRECISION_BITS, MIN_PRECISION_BITS
from models.Precision import Precision


# ---------- Enums ----------
class Method(str, Enum):
    BICG = "bicg"
    CGS = "cgs"
    BICGSTAB = "bicgstab"
    GPBICG = "gpbicg"


class PreconditionerKind(str, Enum):
    NONE = "none"
    ILU0 = "ilu0"


class SolveStatus(str, Enum):
    CONVERGED = "Converged"
    NOT_CONVERGENT = "NotConvergent"  # NaN/Inf appeared
    BREAKDOWN = "Breakdown"
    MAX_ITER_EXCEEDED = "MaxIterExceeded"


# ---------- Solver ----------
class SolverConfig(BaseModel):
    """Tolerances, method and precision of one solve.

    Tolerances are kept as decimal strings and rounded once at the solve
    precision, so 1e-50 stays meaningful far below the binary64 range.
    """
    model_config = ConfigDict(frozen=True)

    method: Method = Method.BICG
    precision_bits: int = Field(DEFAULT_PRECISION_BITS, ge=MIN_PRECISION_BITS, le=MAX_PRECISION_BITS)
    rel_tol: str = "1e-20"
    abs_tol: str = "1e-50"
    max_iter: Optional[int] = Field(None, ge=1, description="Defaults to min(10n, 100000)")
    preconditioner: PreconditionerKind = PreconditionerKind.NONE
    track_residual_gap: bool = False  # records ||r_k - (b - A x_k)|| every iteration

    @field_validator("rel_tol", "abs_tol")
    @classmethod
    def _positive_decimal(cls, v: str) -> str:
        try:
            value = gmpy2.mpfr(str(v).strip(), 64)
        except (ValueError, TypeError):
            raise ValueError(f"not a decimal number: {v!r}")
        if not gmpy2.is_finite(value) or value <= 0:
            raise ValueError(f"tolerance must be positive and finite, got {v!r}")
        return str(v).strip()

    def tolerances(self) -> Tuple[gmpy2.mpfr, gmpy2.mpfr]:
        with Precision(bits=self.precision_bits).context():
            return gmpy2.mpfr(self.rel_tol), gmpy2.mpfr(self.abs_tol)

    def resolved_max_iter(self, n: int) -> int:
        if self.max_iter is not None:
            return self.max_iter
        return max(1, min(10 * n, MAX_ITER_CAP))


class SolveReport(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    method: Method
    precision_bits: int
    # a PreconditionerKind for the built-in preconditioners, the object's name otherwise
    preconditioner: Union[PreconditionerKind, str] = PreconditionerKind.NONE
    status: SolveStatus
    iterations: int = Field(..., ge=0)
    # (iteration, ||r_k|| / ||r_0||), one row per iteration starting at 0
    residual_history: List[Tuple[int, Any]]
    wall_time_seconds: float
    initial_residual: Any
    final_residual: Any  # recursively updated residual norm
    final_true_residual: Any  # ||b - A x|| recomputed from the returned x
    solution: Any
    residual_gap_history: Optional[List[Any]] = None
    reason: Optional[str] = None

    @model_validator(mode="after")
    def _history_matches_iterations(self):
        if len(self.residual_history) != self.iterations + 1:
            raise ValueError(
                f"history has {len(self.residual_history)} rows for {self.iterations} iterations"
            )
        return self

    @property
    def converged(self) -> bool:
        return self.status == SolveStatus.CONVERGED

    @property
    def preconditioner_name(self) -> str:
        if isinstance(self.preconditioner, PreconditionerKind):
            return self.preconditioner.value
        return self.preconditioner

    def final_true_relative_residual(self) -> Any:
        if gmpy2.is_zero(self.initial_residual):
            return self.final_true_residual
        with Precision(bits=self.precision_bits).context():
            return self.final_true_residual / self.initial_residual


# ---------- Bench ----------
class BenchRecord(BaseModel):
    n: int = Field(..., ge=1)
    sparsity_percent: float = Field(..., ge=0, lt=100)
    precision_bits: int
    nnz: int
    dense_seconds: float = Field(..., gt=0)
    sparse_seconds: float = Field(..., gt=0)
    speedup_ratio: float
    trials: int = Field(..., ge=3)
    dense_samples: List[float] = Field(default_factory=list)
    sparse_samples: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def _ratio_consistent(self):
        expected = self.dense_seconds / self.sparse_seconds
        if abs(self.speedup_ratio - expected) > 1e-9 * max(1.0, expected):
            raise ValueError("speedup_ratio must equal dense_seconds / sparse_seconds")
        return self


class ScalarBenchResult(BaseModel):
    digits10: int
    precision_bits: int
    half_precision_bits: int
    full_mul_s: float
    half_mul_s: float
    zero_mul_s: float
    trials: int


class MemoryEstimate(BaseModel):
    precision_bits: int
    header_bytes: int
    dense_bytes: int
    sparse_bytes: int
    sparse_payload_bytes: int
    index_bytes: int


# ---------- Matrix Market ----------
class MtxHeader(BaseModel):
    object: Literal["matrix"] = "matrix"
    format: Literal["coordinate", "array"]
    field: Literal["real", "integer", "pattern"]
    symmetry: Literal["general", "symmetric", "skew-symmetric"]


# ---------- Command requests ----------
def _split_list(value, cast):
    if isinstance(value, str):
        items = [v.strip() for v in value.split(",")]
        if any(not v for v in items):
            raise ValueError(f"empty item in list {value!r}")
        return [cast(v) for v in items]
    if isinstance(value, (int, float)):
        return [cast(value)]
    return [cast(v) for v in value]


def _check_precisions(values: List[int]) -> List[int]:
    for bits in values:
        if not MIN_PRECISION_BITS <= bits <= MAX_PRECISION_BITS:
            raise ValueError(f"precision {bits} outside [{MIN_PRECISION_BITS}, {MAX_PRECISION_BITS}]")
    return values


class SolveRequest(BaseModel):
    matrix: str
    method: Method
    precisions: List[int] = Field(default_factory=lambda: [DEFAULT_PRECISION_BITS], min_length=1)
    precond: PreconditionerKind = PreconditionerKind.NONE
    rtol: str = "1e-20"
    atol: str = "1e-50"
    max_iter: Optional[int] = Field(None, ge=1)
    rhs: Literal["synthetic", "file"] = "synthetic"
    rhs_file: Optional[str] = None
    history: Optional[str] = None
    x0: Literal["zero"] = "zero"

    @field_validator("precisions", mode="before")
    @classmethod
    def _parse_precisions(cls, v):
        return _check_precisions(_split_list(v, int))

    @model_validator(mode="after")
    def _consistent(self):
        if self.rhs == "file" and not self.rhs_file:
            raise ValueError("--rhs file requires --rhs-file")
        if self.rhs == "synthetic" and self.rhs_file:
            raise ValueError("--rhs-file only applies with --rhs file")
        # tolerances are checked by SolverConfig
        self.config_for(self.precisions[0])
        return self

    def config_for(self, bits: int) -> SolverConfig:
        return SolverConfig(
            method=self.method,
            precision_bits=bits,
            rel_tol=self.rtol,
            abs_tol=self.atol,
            max_iter=self.max_iter,
            preconditioner=self.precond,
        )


class BenchSpmvRequest(BaseModel):
    n: List[int] = Field(..., min_length=1)
    sparsity: List[float] = Field(..., min_length=1)
    precisions: List[int] = Field(default_factory=lambda: [DEFAULT_PRECISION_BITS], min_length=1)
    trials: int = Field(5, ge=3)
    seed: int = Field(0, ge=0)
    out: Optional[str] = None

    @field_validator("n", mode="before")
    @classmethod
    def _parse_n(cls, v):
        values = _split_list(v, int)
        if any(n < 1 for n in values):
            raise ValueError("n must be >= 1")
        return values

    @field_validator("sparsity", mode="before")
    @classmethod
    def _parse_sparsity(cls, v):
        values = _split_list(v, float)
        if any(not 0 <= s < 100 for s in values):
            raise ValueError("sparsity must lie in [0, 100)")
        return values

    @field_validator("precisions", mode="before")
    @classmethod
    def _parse_precisions(cls, v):
        return _check_precisions(_split_list(v, int))


class BenchScalarRequest(BaseModel):
    digits: int = Field(10000, ge=100)
    trials: int = Field(5, ge=3)
    repeat: int = Field(100, ge=1)
    out: Optional[str] = None


class GenLotkinRequest(BaseModel):
    n: int = Field(..., ge=1)
    sparsity: float = Field(0.0, ge=0, lt=100)
    seed: int = Field(0, ge=0)
    digits: int = Field(17, ge=17)
    out: str
    precision_bits: int = Field(DEFAULT_PRECISION_BITS, ge=MIN_PRECISION_BITS, le=MAX_PRECISION_BITS)


class InfoRequest(BaseModel):
    matrix: str
    precisions: List[int] = Field(default_factory=lambda: [DEFAULT_PRECISION_BITS], min_length=1)
    header_bytes: int = Field(0, ge=0)

    @field_validator("precisions", mode="before")
    @classmethod
    def _parse_precisions(cls, v):
        return _check_precisions(_split_list(v, int))
