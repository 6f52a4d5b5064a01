import gmpy2
from pydantic import BaseModel, ConfigDict, Field

from config import MIN_PRECISION_BITS, MAX_PRECISION_BITS


class Precision(BaseModel):
    """Binary mantissa length shared by every scalar of one computation."""

    model_config = ConfigDict(frozen=True)

    bits: int = Field(..., ge=MIN_PRECISION_BITS, le=MAX_PRECISION_BITS, description="Mantissa bits")

    def context(self) -> gmpy2.context:
        # round-to-nearest-even, full MPFR exponent range, no traps
        return gmpy2.context(
            precision=self.bits,
            round=gmpy2.RoundToNearest,
            emax=gmpy2.get_emax_max(),
            emin=gmpy2.get_emin_min(),
        )

    def zero(self) -> gmpy2.mpfr:
        return gmpy2.mpfr(0, self.bits)

    def one(self) -> gmpy2.mpfr:
        return gmpy2.mpfr(1, self.bits)

    def decimal_digits(self) -> float:
        return self.bits * 0.30102999566398120

    def __str__(self) -> str:
        return f"{self.bits} bits"
