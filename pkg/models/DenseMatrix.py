from dataclasses import dataclass
from typing import Tuple

import gmpy2

from errors import DimensionMismatchError
from models.Precision import Precision


@dataclass(frozen=True, slots=True)
class DenseMatrix:
    """Row-major dense storage; entry (i, j) lives at entries[i * cols + j]."""

    rows: int
    cols: int
    precision: Precision
    entries: Tuple[gmpy2.mpfr, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatchError("DenseMatrix shape", self.rows, self.cols)
        if len(self.entries) != self.rows * self.cols:
            raise DimensionMismatchError("DenseMatrix entries", len(self.entries), self.rows * self.cols)

    def get(self, i: int, j: int) -> gmpy2.mpfr:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Tuple[gmpy2.mpfr, ...]:
        start = i * self.cols
        return self.entries[start:start + self.cols]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols
