"""
Shared fixtures and oracles for the test suite.

Exact references are computed with gmpy2.mpq; direct solves use unpivoted
dense LU at a much higher working precision than the code under test.
"""
import logging
from typing import List, Sequence

import gmpy2
import numpy as np
import pytest

from models.CsrMatrix import CsrMatrix
from models.MPVector import MPVector
from models.Precision import Precision
from services.matrices import coo_to_csr, to_dense

ORACLE_BITS = 4096


# ---------- Exact arithmetic ----------
def mpq_of(x) -> gmpy2.mpq:
    return gmpy2.mpq(x)


def exact_dot(a: Sequence, b: Sequence) -> gmpy2.mpq:
    s = gmpy2.mpq(0)
    for x, y in zip(a, b):
        s += gmpy2.mpq(x) * gmpy2.mpq(y)
    return s


def ulp_distance(a: gmpy2.mpfr, b: gmpy2.mpfr, bits: int) -> gmpy2.mpq:
    """|a - b| in units of the last place of a at `bits` bits."""
    if gmpy2.is_zero(a):
        return gmpy2.mpq(0) if gmpy2.is_zero(b) else gmpy2.mpq(10 ** 9)
    # a = m * 2**e with 0.5 <= |m| < 1
    e = gmpy2.get_exp(a)
    shift = e - bits
    ulp = gmpy2.mpq(2 ** shift) if shift >= 0 else gmpy2.mpq(1, 2 ** (-shift))
    return abs(gmpy2.mpq(a) - gmpy2.mpq(b)) / ulp


# ---------- Dense LU oracle ----------
def dense_lu(rows: List[list], p: Precision) -> List[list]:
    """Unpivoted KIJ LU, L and U packed in one square list of lists."""
    n = len(rows)
    lu = [list(r) for r in rows]
    with p.context():
        for k in range(n):
            pivot = lu[k][k]
            for i in range(k + 1, n):
                lu[i][k] = lu[i][k] / pivot
                lik = lu[i][k]
                for j in range(k + 1, n):
                    lu[i][j] = lu[i][j] - lik * lu[k][j]
    return lu


def dense_solve(A: CsrMatrix, b: MPVector, bits: int = ORACLE_BITS) -> List[gmpy2.mpfr]:
    """Direct solve of A x = b at `bits` bits; inputs are widened exactly."""
    p = Precision(bits=bits)
    D = to_dense(A)
    n = A.rows
    with p.context():
        rows = [[gmpy2.mpfr(D.get(i, j), bits) for j in range(n)] for i in range(n)]
        rhs = [gmpy2.mpfr(v, bits) for v in b.entries]
    lu = dense_lu(rows, p)
    with p.context():
        y = []
        for i in range(n):
            s = rhs[i]
            for j in range(i):
                s = s - lu[i][j] * y[j]
            y.append(s)
        x = [None] * n
        for i in range(n - 1, -1, -1):
            s = y[i]
            for j in range(i + 1, n):
                s = s - lu[i][j] * x[j]
            x[i] = s / lu[i][i]
    return x


def dense_rows(A: CsrMatrix) -> List[list]:
    D = to_dense(A)
    return [list(D.row(i)) for i in range(D.rows)]


# ---------- Random systems ----------
def random_dd_matrix(rng: np.random.Generator, n: int, p: Precision, density: float = 0.3) -> CsrMatrix:
    """Sparse strictly diagonally dominant matrix with binary64 entries."""
    triplets = []
    with p.context():
        for i in range(n):
            row_sum = 0.0
            for j in range(n):
                if i != j and rng.random() < density:
                    v = float(rng.uniform(-1.0, 1.0))
                    row_sum += abs(v)
                    triplets.append((i, j, gmpy2.mpfr(v, p.bits)))
            diag = row_sum + 1.0 + float(rng.random())
            triplets.append((i, i, gmpy2.mpfr(diag, p.bits)))
    return coo_to_csr(n, n, triplets, p)


def random_dense_pattern_matrix(rng: np.random.Generator, n: int, p: Precision) -> CsrMatrix:
    """Every position stored; diagonal dominant so unpivoted LU is safe."""
    triplets = []
    for i in range(n):
        for j in range(n):
            v = float(rng.uniform(-1.0, 1.0))
            if v == 0.0:
                v = 0.5
            if i == j:
                v = float(n) + abs(v)
            triplets.append((i, j, gmpy2.mpfr(v, p.bits)))
    return coo_to_csr(n, n, triplets, p)


def random_vector(rng: np.random.Generator, n: int, p: Precision) -> MPVector:
    return MPVector(p, tuple(gmpy2.mpfr(float(v), p.bits) for v in rng.uniform(-1.0, 1.0, n)))


# ---------- Fixtures ----------
@pytest.fixture
def rng():
    return np.random.default_rng(20110101)


@pytest.fixture
def p128():
    return Precision(bits=128)


@pytest.fixture
def p512():
    return Precision(bits=512)


@pytest.fixture
def fresh_logger():
    """Detach handlers of the `mpkrylov` logger so each CLI run picks its own log file."""
    logger = logging.getLogger("mpkrylov")
    saved = list(logger.handlers)
    for h in saved:
        logger.removeHandler(h)
    yield logger
    for h in list(logger.handlers):
        logger.removeHandler(h)
        h.close()
    for h in saved:
        logger.addHandler(h)
