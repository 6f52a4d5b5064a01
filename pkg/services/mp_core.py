"""
Scalar and vector primitives at a fixed binary precision.

Every reduction accumulates in ascending index order so that results are
reproducible and dense/sparse kernels can be compared bit for bit.
"""
import math
from typing import Iterable, Sequence

import gmpy2

from errors import DimensionMismatchError, NonFiniteInputError, PrecisionMismatchError
from models.MPVector import MPVector
from models.Precision import Precision


# ---------- Scalars ----------
def promote(d: float, p: Precision) -> gmpy2.mpfr:
    """Embed a binary64 value at precision p (exact for p >= 53)."""
    if not math.isfinite(d):
        raise NonFiniteInputError(f"cannot promote non-finite value {d!r}")
    with p.context():
        return gmpy2.mpfr(float(d), p.bits)


def demote(x: gmpy2.mpfr) -> float:
    """Nearest binary64 to x."""
    return float(x)


def parse_scalar(text: str, p: Precision) -> gmpy2.mpfr:
    """Decimal string rounded once to precision p."""
    with p.context():
        return gmpy2.mpfr(text.strip(), p.bits)


def is_exact_zero(x: gmpy2.mpfr) -> bool:
    return gmpy2.is_zero(x)


def is_finite(x: gmpy2.mpfr) -> bool:
    return gmpy2.is_finite(x)


# ---------- Vector construction ----------
def zeros(dim: int, p: Precision) -> MPVector:
    z = p.zero()
    return MPVector(p, (z,) * dim)


def from_floats(values: Iterable[float], p: Precision) -> MPVector:
    with p.context():
        return MPVector(p, tuple(promote(v, p) for v in values))


def from_strings(values: Iterable[str], p: Precision) -> MPVector:
    return MPVector(p, tuple(parse_scalar(v, p) for v in values))


def from_ints(values: Iterable[int], p: Precision) -> MPVector:
    with p.context():
        return MPVector(p, tuple(gmpy2.mpfr(v) for v in values))


def _check(a: MPVector, b: MPVector, what: str) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(what, a.dim, b.dim)
    if a.precision.bits != b.precision.bits:
        raise PrecisionMismatchError(a.precision.bits, b.precision.bits)


# ---------- Reductions ----------
def dot_entries(a: Sequence[gmpy2.mpfr], b: Sequence[gmpy2.mpfr], zero: gmpy2.mpfr) -> gmpy2.mpfr:
    """Sum of a[k]*b[k] in ascending k; caller holds the precision context."""
    s = zero
    for x, y in zip(a, b):
        s = s + x * y
    return s


def dot(a: MPVector, b: MPVector) -> gmpy2.mpfr:
    _check(a, b, "dot")
    p = a.precision
    with p.context():
        return dot_entries(a.entries, b.entries, p.zero())


def norm2(a: MPVector) -> gmpy2.mpfr:
    p = a.precision
    with p.context():
        return gmpy2.sqrt(dot_entries(a.entries, a.entries, p.zero()))


def is_zero_vector(a: MPVector) -> bool:
    return all(gmpy2.is_zero(x) for x in a.entries)


# ---------- Elementwise ----------
def axpy(alpha: gmpy2.mpfr, x: MPVector, y: MPVector) -> MPVector:
    """alpha*x + y, each component rounded once per operation."""
    _check(x, y, "axpy")
    p = x.precision
    if gmpy2.is_zero(alpha):
        return y
    with p.context():
        return MPVector(p, tuple(alpha * xk + yk for xk, yk in zip(x.entries, y.entries)))


def add(x: MPVector, y: MPVector) -> MPVector:
    _check(x, y, "add")
    p = x.precision
    with p.context():
        return MPVector(p, tuple(xk + yk for xk, yk in zip(x.entries, y.entries)))


def sub(x: MPVector, y: MPVector) -> MPVector:
    _check(x, y, "sub")
    p = x.precision
    with p.context():
        return MPVector(p, tuple(xk - yk for xk, yk in zip(x.entries, y.entries)))


def scale(alpha: gmpy2.mpfr, x: MPVector) -> MPVector:
    p = x.precision
    with p.context():
        return MPVector(p, tuple(alpha * xk for xk in x.entries))


def lincomb(alpha: gmpy2.mpfr, x: MPVector, beta: gmpy2.mpfr, y: MPVector) -> MPVector:
    """alpha*x + beta*y."""
    _check(x, y, "lincomb")
    p = x.precision
    with p.context():
        return MPVector(p, tuple(alpha * xk + beta * yk for xk, yk in zip(x.entries, y.entries)))


def max_abs_diff(x: MPVector, y: MPVector) -> gmpy2.mpfr:
    _check(x, y, "max_abs_diff")
    p = x.precision
    with p.context():
        m = p.zero()
        for xk, yk in zip(x.entries, y.entries):
            d = abs(xk - yk)
            if d > m:
                m = d
        return m
