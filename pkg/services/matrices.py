"""
Dense and CSR matrix kernels, converters and the Lotkin benchmark matrix.

Both products sum in ascending column order, so spmv(A, x) and
dense_mv(to_dense(A), x) agree bit for bit: the dense kernel only adds the
exact zeros the sparse kernel skips.
"""
import logging
import math
from typing import Dict, Iterable, Tuple

import gmpy2

from errors import DimensionMismatchError, PrecisionMismatchError, StructureError
from models.CsrMatrix import CsrMatrix, SparsityPattern
from models.DenseMatrix import DenseMatrix
from models.MPVector import MPVector
from models.Precision import Precision
from schemas import MemoryEstimate
from utils.splitmix import SplitMix64

logger = logging.getLogger("mpkrylov.matrices")

WORD_BYTES = 8


def _check_operand(rows: int, cols: int, p: Precision, x: MPVector, what: str) -> None:
    if cols != x.dim:
        raise DimensionMismatchError(what, cols, x.dim)
    if p.bits != x.precision.bits:
        raise PrecisionMismatchError(p.bits, x.precision.bits)


# ---------- Products ----------
def dense_mv(A: DenseMatrix, x: MPVector) -> MPVector:
    _check_operand(A.rows, A.cols, A.precision, x, "dense_mv")
    p = A.precision
    xs = x.entries
    entries = A.entries
    n = A.cols
    out = []
    with p.context():
        zero = p.zero()
        for i in range(A.rows):
            s = zero
            base = i * n
            for j in range(n):
                s = s + entries[base + j] * xs[j]
            out.append(s)
    return MPVector(p, tuple(out))


def spmv(A: CsrMatrix, x: MPVector) -> MPVector:
    _check_operand(A.rows, A.cols, A.precision, x, "spmv")
    p = A.precision
    xs = x.entries
    values, col_idx, row_ptr = A.values, A.col_idx, A.row_ptr
    out = []
    with p.context():
        zero = p.zero()
        for i in range(A.rows):
            s = zero
            for k in range(row_ptr[i], row_ptr[i + 1]):
                s = s + values[k] * xs[col_idx[k]]
            out.append(s)
    return MPVector(p, tuple(out))


def transpose_spmv(A: CsrMatrix, x: MPVector) -> MPVector:
    """y = A^T x, scattering rows in ascending order.

    Each y[j] receives its terms in ascending row index, the same order a
    dense product with the explicit transpose would use.
    """
    if A.rows != x.dim:
        raise DimensionMismatchError("transpose_spmv", A.rows, x.dim)
    if A.precision.bits != x.precision.bits:
        raise PrecisionMismatchError(A.precision.bits, x.precision.bits)
    p = A.precision
    xs = x.entries
    values, col_idx, row_ptr = A.values, A.col_idx, A.row_ptr
    with p.context():
        acc = [p.zero()] * A.cols
        for i in range(A.rows):
            xi = xs[i]
            for k in range(row_ptr[i], row_ptr[i + 1]):
                j = col_idx[k]
                acc[j] = acc[j] + values[k] * xi
    return MPVector(p, tuple(acc))


# ---------- Construction / conversion ----------
def coo_to_csr(
    rows: int,
    cols: int,
    entries: Iterable[Tuple[int, int, gmpy2.mpfr]],
    p: Precision,
    keep_zeros: bool = False,
) -> CsrMatrix:
    """Build CSR from 0-based (i, j, value) triplets.

    Duplicates are summed in input order; exact zeros are dropped unless
    keep_zeros is set.
    """
    merged: Dict[Tuple[int, int], gmpy2.mpfr] = {}
    with p.context():
        for i, j, v in entries:
            if not (0 <= i < rows and 0 <= j < cols):
                raise StructureError(f"entry ({i}, {j}) outside {rows}x{cols}")
            key = (i, j)
            if key in merged:
                merged[key] = merged[key] + v
            else:
                merged[key] = v
    per_row: Dict[int, list] = {}
    for (i, j), v in merged.items():
        if not keep_zeros and gmpy2.is_zero(v):
            continue
        per_row.setdefault(i, []).append((j, v))
    values, col_idx, row_ptr = [], [], [0]
    for i in range(rows):
        for j, v in sorted(per_row.get(i, ()), key=lambda t: t[0]):
            col_idx.append(j)
            values.append(v)
        row_ptr.append(len(values))
    return CsrMatrix(rows, cols, p, tuple(values), tuple(col_idx), tuple(row_ptr))


def to_dense(A: CsrMatrix) -> DenseMatrix:
    zero = A.precision.zero()
    entries = [zero] * (A.rows * A.cols)
    for i in range(A.rows):
        base = i * A.cols
        for k in A.row_slice(i):
            entries[base + A.col_idx[k]] = A.values[k]
    return DenseMatrix(A.rows, A.cols, A.precision, tuple(entries))


def to_csr(A: DenseMatrix, keep_zeros: bool = False) -> CsrMatrix:
    values, col_idx, row_ptr = [], [], [0]
    for i in range(A.rows):
        row = A.row(i)
        for j, v in enumerate(row):
            if keep_zeros or not gmpy2.is_zero(v):
                values.append(v)
                col_idx.append(j)
        row_ptr.append(len(values))
    return CsrMatrix(A.rows, A.cols, A.precision, tuple(values), tuple(col_idx), tuple(row_ptr))


def pattern(A: CsrMatrix) -> SparsityPattern:
    return A.pattern


def identity(n: int, p: Precision) -> CsrMatrix:
    one = p.one()
    return CsrMatrix(n, n, p, (one,) * n, tuple(range(n)), tuple(range(n + 1)))


def dense_identity(n: int, p: Precision) -> DenseMatrix:
    return to_dense(identity(n, p))


def transpose(A: CsrMatrix) -> CsrMatrix:
    triplets = [(A.col_idx[k], i, A.values[k]) for i in range(A.rows) for k in A.row_slice(i)]
    return coo_to_csr(A.cols, A.rows, triplets, A.precision, keep_zeros=True)


# ---------- Lotkin benchmark matrix ----------
def gen_lotkin(n: int, p: Precision) -> DenseMatrix:
    """First row all ones, a_ij = 1/(i+j-1) below it (1-based).

    Entries on one anti-diagonal share the same immutable mpfr object, so
    the dense matrix costs one pointer per position.
    """
    if n < 1:
        raise DimensionMismatchError("gen_lotkin", n, 1)
    with p.context():
        one = p.one()
        # reciprocal[d] = 1/d for d = i + j - 1 in [2, 2n - 1]
        reciprocal = [None, one] + [one / gmpy2.mpfr(d) for d in range(2, 2 * n)]
    entries = [one] * n
    for i in range(2, n + 1):
        entries.extend(reciprocal[i + j - 1] for j in range(1, n + 1))
    return DenseMatrix(n, n, p, tuple(entries))


def zero_count(total: int, s: float) -> int:
    """Number of positions zeroed for s% of `total` positions (round half up)."""
    return min(int(math.floor(s / 100.0 * total + 0.5)), total)


def choose_positions(total: int, k: int, seed: int) -> list:
    """First k slots of a Fisher-Yates shuffle of range(total).

    Only the touched slots are materialized, so the cost is O(k).
    """
    rng = SplitMix64(seed)
    swapped: Dict[int, int] = {}
    for i in range(k):
        j = i + rng.below(total - i)
        vi = swapped.get(i, i)
        swapped[i] = swapped.get(j, j)
        swapped[j] = vi
    return [swapped.get(i, i) for i in range(k)]


def sparsify(A: DenseMatrix, s: float, seed: int) -> CsrMatrix:
    """Zero exactly round(s/100 * rows*cols) distinct positions, then convert.

    Positions come from a partial Fisher-Yates shuffle of the linear indices
    driven by SplitMix64(seed).
    """
    if not 0 <= s < 100:
        raise ValueError(f"sparsity must lie in [0, 100), got {s}")
    total = A.rows * A.cols
    k = zero_count(total, s)
    zero = A.precision.zero()
    entries = list(A.entries)
    for idx in choose_positions(total, k, seed):
        entries[idx] = zero
    logger.debug("sparsify: %d of %d positions zeroed (s=%s, seed=%d)", k, total, s, seed)
    return to_csr(DenseMatrix(A.rows, A.cols, A.precision, tuple(entries)))


def gen_lotkin_sparse(n: int, s: float, seed: int, p: Precision) -> CsrMatrix:
    return sparsify(gen_lotkin(n, p), s, seed)


# ---------- Memory model ----------
def estimate_memory(n: int, nnz: int, p: Precision | int, header_bytes: int = 0) -> MemoryEstimate:
    """Storage estimate; mantissa payload plus a fixed per-element header."""
    bits = p.bits if isinstance(p, Precision) else int(p)
    if n < 0 or nnz < 0 or header_bytes < 0:
        raise ValueError("estimate_memory arguments must be nonnegative")
    per_element = bits // 8 + header_bytes
    if n == 0:
        return MemoryEstimate(precision_bits=bits, header_bytes=header_bytes,
                              dense_bytes=0, sparse_bytes=0, sparse_payload_bytes=0, index_bytes=0)
    payload = nnz * per_element
    index_bytes = (nnz + n + 1) * WORD_BYTES
    return MemoryEstimate(
        precision_bits=bits,
        header_bytes=header_bytes,
        dense_bytes=n * n * per_element,
        sparse_bytes=payload + index_bytes,
        sparse_payload_bytes=payload,
        index_bytes=index_bytes,
    )
