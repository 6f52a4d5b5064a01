from dataclasses import dataclass
from typing import Tuple

from models.CsrMatrix import CsrMatrix


@dataclass(frozen=True, slots=True)
class Ilu0Factor:
    """Combined ILU(0) factors in one CSR matrix on the pattern of A.

    Strictly lower entries hold L (unit diagonal implied); the diagonal and
    the entries above it hold U. diag_ptr[i] is the position of (i, i).
    """

    lu: CsrMatrix
    diag_ptr: Tuple[int, ...]

    @property
    def rows(self) -> int:
        return self.lu.rows

    @property
    def precision(self):
        return self.lu.precision
