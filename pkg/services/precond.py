"""
ILU(0) factorization on the CSR pattern and the triangular solves used for
left preconditioning.

The factorization is the IKJ variant restricted to the pattern of A: no
fill-in, no pivoting. Updates to each entry happen in ascending pivot order,
so on a fully dense pattern the result is identical to unpivoted dense LU.
"""
import logging
from typing import Dict, Protocol

import gmpy2

from errors import DimensionMismatchError, MissingDiagonalError, PrecisionMismatchError, ZeroPivotError
from models.CsrMatrix import CsrMatrix
from models.Ilu0Factor import Ilu0Factor
from models.MPVector import MPVector
from services.mp_core import norm2

logger = logging.getLogger("mpkrylov.precond")


def _diagonal_positions(A: CsrMatrix) -> tuple:
    diag = []
    for i in range(A.rows):
        pos = None
        for k in A.row_slice(i):
            if A.col_idx[k] == i:
                pos = k
                break
        if pos is None:
            raise MissingDiagonalError(i)
        diag.append(pos)
    return tuple(diag)


def ilu0_factorize(A: CsrMatrix) -> Ilu0Factor:
    if A.rows != A.cols:
        raise DimensionMismatchError("ilu0_factorize (square matrix required)", A.rows, A.cols)
    diag_ptr = _diagonal_positions(A)
    col_idx, row_ptr = A.col_idx, A.row_ptr
    lu = list(A.values)
    p = A.precision

    with p.context():
        if A.rows and gmpy2.is_zero(lu[diag_ptr[0]]):
            raise ZeroPivotError(0)
        for i in range(1, A.rows):
            # column -> position for row i, restricts updates to the pattern
            where: Dict[int, int] = {col_idx[k]: k for k in range(row_ptr[i], row_ptr[i + 1])}
            for k in range(row_ptr[i], diag_ptr[i]):
                kcol = col_idx[k]
                lu[k] = lu[k] / lu[diag_ptr[kcol]]
                lik = lu[k]
                for kk in range(diag_ptr[kcol] + 1, row_ptr[kcol + 1]):
                    pos = where.get(col_idx[kk])
                    if pos is not None:
                        lu[pos] = lu[pos] - lik * lu[kk]
            if gmpy2.is_zero(lu[diag_ptr[i]]):
                raise ZeroPivotError(i)

    logger.debug("ilu0_factorize: n=%d nnz=%d at %d bits", A.rows, A.nnz, p.bits)
    factor = CsrMatrix(A.rows, A.cols, p, tuple(lu), A.col_idx, A.row_ptr)
    return Ilu0Factor(factor, diag_ptr)


def _check_rhs(F: Ilu0Factor, r: MPVector) -> None:
    if F.rows != r.dim:
        raise DimensionMismatchError("ilu0 solve", F.rows, r.dim)
    if F.precision.bits != r.precision.bits:
        raise PrecisionMismatchError(F.precision.bits, r.precision.bits)


def ilu0_solve(F: Ilu0Factor, r: MPVector) -> MPVector:
    """w = U^-1 (L^-1 r)."""
    _check_rhs(F, r)
    lu, col_idx, row_ptr, diag_ptr = F.lu.values, F.lu.col_idx, F.lu.row_ptr, F.diag_ptr
    n = F.rows
    p = F.precision
    y = list(r.entries)
    with p.context():
        for i in range(n):
            s = y[i]
            for k in range(row_ptr[i], diag_ptr[i]):
                s = s - lu[k] * y[col_idx[k]]
            y[i] = s
        for i in range(n - 1, -1, -1):
            s = y[i]
            for k in range(diag_ptr[i] + 1, row_ptr[i + 1]):
                s = s - lu[k] * y[col_idx[k]]
            y[i] = s / lu[diag_ptr[i]]
    return MPVector(p, tuple(y))


def ilu0_solve_transpose(F: Ilu0Factor, r: MPVector) -> MPVector:
    """w = L^-T (U^-T r), column-oriented over the row storage."""
    _check_rhs(F, r)
    lu, col_idx, row_ptr, diag_ptr = F.lu.values, F.lu.col_idx, F.lu.row_ptr, F.diag_ptr
    n = F.rows
    p = F.precision
    z = list(r.entries)
    with p.context():
        # U^T is lower triangular: row i of U scatters into later components
        for i in range(n):
            zi = z[i] / lu[diag_ptr[i]]
            z[i] = zi
            for k in range(diag_ptr[i] + 1, row_ptr[i + 1]):
                j = col_idx[k]
                z[j] = z[j] - lu[k] * zi
        # L^T is unit upper triangular: row i of L scatters into earlier components
        for i in range(n - 1, -1, -1):
            wi = z[i]
            for k in range(row_ptr[i], diag_ptr[i]):
                j = col_idx[k]
                z[j] = z[j] - lu[k] * wi
    return MPVector(p, tuple(z))


def lu_apply(F: Ilu0Factor, w: MPVector) -> MPVector:
    """K w = L (U w), the preconditioner itself."""
    _check_rhs(F, w)
    lu, col_idx, row_ptr, diag_ptr = F.lu.values, F.lu.col_idx, F.lu.row_ptr, F.diag_ptr
    n = F.rows
    p = F.precision
    ws = w.entries
    with p.context():
        u = []
        for i in range(n):
            s = p.zero()
            for k in range(diag_ptr[i], row_ptr[i + 1]):
                s = s + lu[k] * ws[col_idx[k]]
            u.append(s)
        out = []
        for i in range(n):
            s = u[i]
            for k in range(row_ptr[i], diag_ptr[i]):
                s = s + lu[k] * u[col_idx[k]]
            out.append(s)
    return MPVector(p, tuple(out))


# ---------- Preconditioner interface used by the solvers ----------
class Preconditioner(Protocol):
    def solve(self, r: MPVector) -> MPVector: ...

    def solve_transpose(self, r: MPVector) -> MPVector: ...


class IdentityPreconditioner:
    """K = I; both solves return their argument unchanged."""

    name = "none"

    def solve(self, r: MPVector) -> MPVector:
        return r

    def solve_transpose(self, r: MPVector) -> MPVector:
        return r


class Ilu0Preconditioner:
    name = "ilu0"

    def __init__(self, A: CsrMatrix):
        self.factor = ilu0_factorize(A)

    def solve(self, r: MPVector) -> MPVector:
        return ilu0_solve(self.factor, r)

    def solve_transpose(self, r: MPVector) -> MPVector:
        return ilu0_solve_transpose(self.factor, r)


def preconditioned_residual_norm(K: Preconditioner, r: MPVector) -> gmpy2.mpfr:
    """||K^-1 r||_2, the norm a left-preconditioned residual test would use."""
    return norm2(K.solve(r))
