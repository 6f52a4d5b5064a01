from dataclasses import dataclass
from typing import Iterator, Tuple

import gmpy2

from errors import DimensionMismatchError
from models.Precision import Precision


@dataclass(frozen=True, slots=True)
class MPVector:
    """Fixed-length sequence of mpfr values sharing one precision."""

    precision: Precision
    entries: Tuple[gmpy2.mpfr, ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise DimensionMismatchError("MPVector", 0, 1)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[gmpy2.mpfr]:
        return iter(self.entries)

    def __getitem__(self, k: int) -> gmpy2.mpfr:
        return self.entries[k]

    def bit_equal(self, other: "MPVector") -> bool:
        """Componentwise identity including the sign of zero."""
        if self.dim != other.dim or self.precision != other.precision:
            return False
        for a, b in zip(self.entries, other.entries):
            if gmpy2.is_nan(a) or gmpy2.is_nan(b):
                if not (gmpy2.is_nan(a) and gmpy2.is_nan(b)):
                    return False
            elif a != b or gmpy2.is_signed(a) != gmpy2.is_signed(b):
                return False
        return True
