from dataclasses import dataclass
from typing import Tuple

import gmpy2

from errors import StructureError
from models.Precision import Precision


@dataclass(frozen=True, slots=True)
class SparsityPattern:
    """Structure of a CSR matrix without its values."""

    rows: int
    cols: int
    row_ptr: Tuple[int, ...]
    col_idx: Tuple[int, ...]

    def __post_init__(self):
        check_structure(self.rows, self.cols, self.row_ptr, self.col_idx)

    @property
    def nnz(self) -> int:
        return len(self.col_idx)


@dataclass(frozen=True, slots=True)
class CsrMatrix:
    """Canonical three-array CSR matrix of mpfr values.

    Row i owns values[row_ptr[i]:row_ptr[i + 1]] with strictly increasing
    column indices. Exact zeros are stored only when the builder was asked
    to keep them.
    """

    rows: int
    cols: int
    precision: Precision
    values: Tuple[gmpy2.mpfr, ...]
    col_idx: Tuple[int, ...]
    row_ptr: Tuple[int, ...]

    def __post_init__(self):
        check_structure(self.rows, self.cols, self.row_ptr, self.col_idx)
        if len(self.values) != len(self.col_idx):
            raise StructureError(
                f"values/col_idx length mismatch ({len(self.values)} vs {len(self.col_idx)})"
            )

    @property
    def nnz(self) -> int:
        return len(self.values)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def pattern(self) -> SparsityPattern:
        return SparsityPattern(self.rows, self.cols, self.row_ptr, self.col_idx)

    def row_slice(self, i: int) -> range:
        return range(self.row_ptr[i], self.row_ptr[i + 1])

    def sparsity_percent(self) -> float:
        """Share of the rows*cols positions that are not stored."""
        total = self.rows * self.cols
        if total == 0:
            return 100.0
        return 100.0 * (1.0 - self.nnz / total)


def check_structure(rows: int, cols: int, row_ptr: Tuple[int, ...], col_idx: Tuple[int, ...]) -> None:
    if rows < 0 or cols < 0:
        raise StructureError(f"negative shape ({rows}, {cols})")
    if len(row_ptr) != rows + 1:
        raise StructureError(f"row_ptr has length {len(row_ptr)}, expected {rows + 1}")
    if row_ptr[0] != 0:
        raise StructureError("row_ptr[0] must be 0")
    if row_ptr[rows] != len(col_idx):
        raise StructureError(f"row_ptr[{rows}]={row_ptr[rows]} but nnz={len(col_idx)}")
    for i in range(rows):
        if row_ptr[i + 1] < row_ptr[i]:
            raise StructureError(f"row_ptr decreases at row {i}")
    for i in range(rows):
        start, end = row_ptr[i], row_ptr[i + 1]
        prev = -1
        for k in range(start, end):
            c = col_idx[k]
            if c < 0 or c >= cols:
                raise StructureError(f"row {i}: column {c} out of range [0, {cols})")
            if c <= prev:
                raise StructureError(f"row {i}: column indices not strictly increasing")
            prev = c
