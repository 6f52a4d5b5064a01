import gmpy2
import pytest

from conftest import ulp_distance
from errors import DimensionMismatchError, PrecisionMismatchError, StructureError
from models.CsrMatrix import CsrMatrix, check_structure
from models.DenseMatrix import DenseMatrix
from models.Precision import Precision
from services.matrices import (
    coo_to_csr,
    dense_identity,
    dense_mv,
    estimate_memory,
    gen_lotkin,
    gen_lotkin_sparse,
    identity,
    pattern,
    sparsify,
    spmv,
    to_csr,
    to_dense,
    transpose,
    transpose_spmv,
    zero_count,
)
from services.mp_core import from_floats, from_ints, is_exact_zero, zeros
from utils.splitmix import SplitMix64


def _dense(rows, p):
    n, m = len(rows), len(rows[0])
    with p.context():
        entries = tuple(gmpy2.mpfr(v) for row in rows for v in row)
    return DenseMatrix(n, m, p, entries)


# ---------- Products ----------
def test_dense_identity_product(p128):
    x = from_ints([1, 2, 3], p128)
    assert dense_mv(dense_identity(3, p128), x).bit_equal(x)


def test_dense_zero_matrix_gives_zero(p128):
    Z = _dense([[0, 0], [0, 0]], p128)
    y = dense_mv(Z, from_floats([1.5, -2.25], p128))
    assert all(is_exact_zero(v) for v in y)


def test_dense_dyadic_matches_oracle():
    p = Precision(bits=256)
    rows = [[(i + 1) / 2 ** j - j / 8 for j in range(5)] for i in range(5)]
    A = _dense(rows, p)
    x = from_floats([0.25, -1.5, 3.0, 0.125, -0.75], p)
    y = dense_mv(A, x)
    for i in range(5):
        exact = sum(gmpy2.mpq(rows[i][j]) * gmpy2.mpq(x[j]) for j in range(5))
        with p.context():
            assert ulp_distance(gmpy2.mpfr(exact), y[i], 256) <= 2


def test_spmv_diagonal(p128):
    A = coo_to_csr(2, 2, [(0, 0, gmpy2.mpfr(2)), (1, 1, gmpy2.mpfr(3))], p128)
    assert spmv(A, from_ints([1, 1], p128)).entries == (2, 3)


def test_spmv_empty_row_is_exact_zero(p128):
    A = coo_to_csr(3, 3, [(0, 0, gmpy2.mpfr(1)), (2, 1, gmpy2.mpfr(5))], p128)
    y = spmv(A, from_ints([7, 8, 9], p128))
    assert is_exact_zero(y[1]) and not gmpy2.is_signed(y[1])


def test_spmv_rejects_mismatches(p128, p512):
    A = identity(3, p128)
    with pytest.raises(DimensionMismatchError):
        spmv(A, from_ints([1, 2], p128))
    with pytest.raises(PrecisionMismatchError):
        spmv(A, from_ints([1, 2, 3], p512))


def test_spmv_equals_dense_bitwise_on_sparsified_lotkin(rng):
    """200 random (n, s, p) configurations, no tolerance."""
    for trial in range(200):
        n = int(rng.integers(10, 201))
        s = float(rng.choice([0, 50, 90, 99]))
        p = Precision(bits=int(rng.choice([128, 512, 1024])))
        A = gen_lotkin_sparse(n, s, seed=trial, p=p)
        x = from_floats(rng.uniform(-10, 10, n).tolist(), p)
        assert spmv(A, x).bit_equal(dense_mv(to_dense(A), x)), (n, s, p.bits)


def test_transpose_spmv_equals_dense_transpose(rng):
    p = Precision(bits=200)
    A = gen_lotkin_sparse(40, 70, seed=3, p=p)
    x = from_floats(rng.uniform(-1, 1, 40).tolist(), p)
    assert transpose_spmv(A, x).bit_equal(dense_mv(to_dense(transpose(A)), x))


def test_transpose_spmv_rectangular(p128):
    A = coo_to_csr(2, 3, [(0, 2, gmpy2.mpfr(4)), (1, 0, gmpy2.mpfr(-1))], p128)
    assert transpose_spmv(A, from_ints([1, 2], p128)).entries == (-2, 0, 4)


# ---------- Conversion ----------
def test_identity_round_trip(p128):
    A = identity(4, p128)
    B = to_csr(to_dense(A))
    assert B.values == A.values and B.pattern == A.pattern


def test_dense_zero_matrix_to_csr_is_empty(p128):
    A = to_csr(_dense([[0, 0, 0], [0, 0, 0]], p128))
    assert A.nnz == 0
    assert A.row_ptr == (0, 0, 0)
    assert A.sparsity_percent() == 100.0


def test_sparsified_lotkin_round_trip(p512):
    A = gen_lotkin_sparse(50, 60, seed=11, p=p512)
    B = to_csr(to_dense(A))
    assert B.pattern == A.pattern
    assert all(a == b for a, b in zip(A.values, B.values))


def test_coo_to_csr_sums_duplicates_and_drops_zeros(p128):
    one = gmpy2.mpfr(1)
    A = coo_to_csr(2, 2, [(1, 1, one), (0, 1, one), (1, 1, one), (0, 0, one), (0, 0, -one)], p128)
    assert A.nnz == 2
    assert A.col_idx == (1, 1)
    assert A.values[1] == 2
    kept = coo_to_csr(2, 2, [(0, 0, one), (0, 0, -one)], p128, keep_zeros=True)
    assert kept.nnz == 1 and is_exact_zero(kept.values[0])


def test_coo_to_csr_rejects_out_of_range(p128):
    with pytest.raises(StructureError):
        coo_to_csr(2, 2, [(2, 0, gmpy2.mpfr(1))], p128)


def test_structure_invariants_are_enforced(p128):
    one = p128.one()
    with pytest.raises(StructureError):
        CsrMatrix(2, 2, p128, (one, one), (1, 0), (0, 2, 2))  # unsorted columns
    with pytest.raises(StructureError):
        CsrMatrix(2, 2, p128, (one,), (2,), (0, 1, 1))  # column out of range
    with pytest.raises(StructureError):
        check_structure(2, 2, (0, 2, 1), (0,))  # row_ptr decreasing


def test_pattern_accessor(p128):
    A = identity(3, p128)
    pat = pattern(A)
    assert pat.row_ptr == (0, 1, 2, 3) and pat.col_idx == (0, 1, 2)


# ---------- Lotkin ----------
def test_lotkin_one_by_one(p128):
    assert gen_lotkin(1, p128).entries == (1,)


def test_lotkin_three_by_three(p128):
    L = gen_lotkin(3, p128)
    with p128.context():
        expected = [1, 1, 1, 1 / gmpy2.mpfr(2), 1 / gmpy2.mpfr(3), 1 / gmpy2.mpfr(4),
                    1 / gmpy2.mpfr(3), 1 / gmpy2.mpfr(4), 1 / gmpy2.mpfr(5)]
    assert list(L.entries) == expected


@pytest.mark.parametrize("n", [2, 7, 16])
def test_lotkin_trailing_block_is_symmetric(p512, n):
    L = gen_lotkin(n, p512)
    for i in range(1, n):
        for j in range(1, n):
            a, b = L.get(i, j), L.get(j, i)
            assert a == b and gmpy2.is_signed(a) == gmpy2.is_signed(b)
    if n > 2:
        assert L.get(0, 1) != L.get(1, 0)


def test_lotkin_corner_matches_oracle(p512):
    L = gen_lotkin(10, p512)
    with p512.context():
        expected = gmpy2.mpfr(gmpy2.mpq(1, 19))
    assert ulp_distance(expected, L.get(9, 9), 512) <= 1


# ---------- Sparsify ----------
def test_sparsify_zero_percent_keeps_everything(p128):
    assert sparsify(gen_lotkin(12, p128), 0, seed=1).nnz == 144


def test_sparsify_ninety_nine_percent(p128):
    assert sparsify(gen_lotkin(100, p128), 99, seed=5).nnz == 100


def test_sparsify_is_deterministic(p128):
    a = gen_lotkin_sparse(30, 75, seed=42, p=p128)
    b = gen_lotkin_sparse(30, 75, seed=42, p=p128)
    assert a.pattern == b.pattern and a.values == b.values
    c = gen_lotkin_sparse(30, 75, seed=43, p=p128)
    assert c.pattern != a.pattern


@pytest.mark.parametrize("s", [-1, 100, 150])
def test_sparsify_rejects_bad_percentage(p128, s):
    with pytest.raises(ValueError):
        sparsify(gen_lotkin(3, p128), s, seed=0)


def test_zero_count_rounds_half_up():
    assert zero_count(10, 25) == 3
    assert zero_count(100, 99) == 99
    assert zero_count(4, 0) == 0


def test_splitmix_reference_values():
    rng = SplitMix64(1234567)
    assert [rng.next_u64() for _ in range(3)] == [
        6457827717110365317,
        3203168211198807973,
        9817491932198370423,
    ]


# ---------- Memory model ----------
def test_estimate_memory_payload():
    m = estimate_memory(100, 1000, 512, header_bytes=32)
    assert m.sparse_payload_bytes == 96000
    assert m.index_bytes == (1000 + 101) * 8
    assert m.sparse_bytes == 96000 + m.index_bytes
    assert m.dense_bytes == 100 * 100 * 96


def test_estimate_memory_epb3_order_of_magnitude():
    m = estimate_memory(84617, 463625, Precision(bits=8192))
    assert 4.5e8 < m.sparse_payload_bytes < 5.0e8


def test_estimate_memory_empty():
    m = estimate_memory(0, 0, 256)
    assert m.dense_bytes == 0 and m.sparse_bytes == 0


def test_zero_vector_helper(p128):
    assert all(is_exact_zero(v) for v in zeros(5, p128))
