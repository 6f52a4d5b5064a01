import gmpy2
import pytest

from conftest import (
    dense_lu,
    dense_rows,
    dense_solve,
    random_dd_matrix,
    random_dense_pattern_matrix,
    random_vector,
    ulp_distance,
)
from errors import MissingDiagonalError, ZeroPivotError
from models.Precision import Precision
from services.matrices import coo_to_csr, identity, spmv, transpose
from services.mp_core import from_ints, max_abs_diff, norm2, sub, zeros
from services.precond import (
    IdentityPreconditioner,
    Ilu0Preconditioner,
    ilu0_factorize,
    ilu0_solve,
    ilu0_solve_transpose,
    lu_apply,
    preconditioned_residual_norm,
)

P256 = Precision(bits=256)


def _csr(rows, p, keep_zeros=False):
    with p.context():
        triplets = [(i, j, gmpy2.mpfr(v)) for i, row in enumerate(rows) for j, v in enumerate(row)]
    return coo_to_csr(len(rows), len(rows[0]), triplets, p, keep_zeros=keep_zeros)


def _factor_entry(F, i, j):
    for k in F.lu.row_slice(i):
        if F.lu.col_idx[k] == j:
            return F.lu.values[k]
    raise KeyError((i, j))


def test_diagonal_matrix_factors_to_itself(p128):
    A = _csr([[2, 0, 0], [0, -3, 0], [0, 0, 0.5]], p128)
    F = ilu0_factorize(A)
    assert F.lu.values == A.values
    assert F.diag_ptr == (0, 1, 2)


def test_hand_factorization(p128):
    F = ilu0_factorize(_csr([[4, 0], [2, 1]], p128))
    assert _factor_entry(F, 1, 0) == 0.5
    assert _factor_entry(F, 0, 0) == 4 and _factor_entry(F, 1, 1) == 1


def test_dense_pattern_matches_dense_lu(rng):
    A = random_dense_pattern_matrix(rng, 6, P256)
    F = ilu0_factorize(A)
    lu = dense_lu(dense_rows(A), P256)
    for i in range(6):
        for j in range(6):
            assert ulp_distance(lu[i][j], _factor_entry(F, i, j), 256) <= 4


def test_twenty_dense_patterns_match_dense_lu(rng):
    for _ in range(20):
        n = int(rng.integers(2, 9))
        A = random_dense_pattern_matrix(rng, n, P256)
        F = ilu0_factorize(A)
        lu = dense_lu(dense_rows(A), P256)
        for i in range(n):
            for j in range(n):
                assert ulp_distance(lu[i][j], _factor_entry(F, i, j), 256) <= 4


def test_upper_triangular_input_is_reproduced_bitwise(rng):
    A = random_dense_pattern_matrix(rng, 5, P256)
    upper = [[v if j >= i else 0 for j, v in enumerate(row)] for i, row in enumerate(dense_rows(A))]
    U = _csr(upper, P256)
    F = ilu0_factorize(U)
    assert F.lu.values == U.values


def test_lower_triangular_input_matches_dense_lu_bitwise(rng):
    A = random_dense_pattern_matrix(rng, 5, P256)
    lower = [[v if j <= i else 0 for j, v in enumerate(row)] for i, row in enumerate(dense_rows(A))]
    L = _csr(lower, P256)
    F = ilu0_factorize(L)
    lu = dense_lu(lower, P256)
    for i in range(5):
        for j in range(i + 1):
            assert _factor_entry(F, i, j) == lu[i][j]


def test_no_fill_in_outside_the_pattern(p128):
    # dense LU of this matrix fills (2, 1); ILU(0) must not
    A = _csr([[4, 1, 1], [1, 4, 0], [1, 0, 4]], p128)
    F = ilu0_factorize(A)
    assert F.lu.pattern == A.pattern


def test_missing_diagonal(p128):
    with pytest.raises(MissingDiagonalError) as info:
        ilu0_factorize(_csr([[1, 1], [1, 0]], p128))
    assert info.value.row == 1


def test_zero_pivot_in_first_row(p128):
    with pytest.raises(ZeroPivotError) as info:
        ilu0_factorize(_csr([[0, 1], [1, 0]], p128, keep_zeros=True))
    assert info.value.row == 0


def test_zero_pivot_after_elimination(p128):
    with pytest.raises(ZeroPivotError) as info:
        ilu0_factorize(_csr([[1, 1], [1, 1]], p128))
    assert info.value.row == 1


def test_solve_with_identity_factor_passes_through(rng, p128):
    F = ilu0_factorize(identity(4, p128))
    r = random_vector(rng, 4, p128)
    assert ilu0_solve(F, r).bit_equal(r)
    assert ilu0_solve_transpose(F, r).bit_equal(r)


def test_solve_diagonal(p128):
    F = ilu0_factorize(_csr([[2, 0], [0, 4]], p128))
    assert ilu0_solve(F, from_ints([2, 4], p128)).entries == (1, 1)


def test_solve_inverts_exact_factorization(rng):
    A = random_dense_pattern_matrix(rng, 6, P256)
    F = ilu0_factorize(A)
    bound = gmpy2.mpfr("1e-70", 256)
    for j in range(6):
        e = from_ints([1 if k == j else 0 for k in range(6)], P256)
        assert max_abs_diff(ilu0_solve(F, spmv(A, e)), e) <= bound


def test_lu_apply_reproduces_matrix_on_dense_pattern(rng):
    A = random_dense_pattern_matrix(rng, 5, P256)
    F = ilu0_factorize(A)
    x = random_vector(rng, 5, P256)
    assert max_abs_diff(lu_apply(F, x), spmv(A, x)) <= gmpy2.mpfr("1e-70", 256)


def test_factor_applied_to_solve_reproduces_rhs(rng):
    for n in range(5, 31):
        A = random_dd_matrix(rng, n, P256, density=0.2)
        F = ilu0_factorize(A)
        r = random_vector(rng, n, P256)
        with P256.context():
            bound = n * gmpy2.mpfr(2) ** (4 - 256) * norm2(r)
        assert norm2(sub(lu_apply(F, ilu0_solve(F, r)), r)) <= bound, n


def test_transpose_solve_on_symmetric_matrix(rng):
    A = random_dense_pattern_matrix(rng, 6, P256)
    rows = dense_rows(A)
    sym = [[rows[max(i, j)][min(i, j)] for j in range(6)] for i in range(6)]
    F = ilu0_factorize(_csr(sym, P256))
    r = random_vector(rng, 6, P256)
    a, b = ilu0_solve(F, r), ilu0_solve_transpose(F, r)
    with P256.context():
        assert max_abs_diff(a, b) <= gmpy2.mpfr("1e-70") * norm2(a)


def test_transpose_solve_matches_dense_oracle(rng):
    A = random_dense_pattern_matrix(rng, 5, P256)
    F = ilu0_factorize(A)
    r = random_vector(rng, 5, P256)
    expected = dense_solve(transpose(A), r)
    got = ilu0_solve_transpose(F, r)
    for e, g in zip(expected, got.entries):
        with P256.context():
            assert ulp_distance(gmpy2.mpfr(e), g, 256) <= 4 or abs(gmpy2.mpfr(e) - g) <= gmpy2.mpfr("1e-72")


def test_preconditioner_objects(rng, p128):
    A = _csr([[4, 1], [1, 3]], p128)
    r = from_ints([1, 2], p128)
    K = Ilu0Preconditioner(A)
    assert K.name == "ilu0"
    assert K.solve(r).bit_equal(ilu0_solve(K.factor, r))
    assert K.solve_transpose(r).bit_equal(ilu0_solve_transpose(K.factor, r))
    I = IdentityPreconditioner()
    assert I.solve(r) is r and I.solve_transpose(r) is r
    assert preconditioned_residual_norm(I, r) == norm2(r)
    assert preconditioned_residual_norm(K, zeros(2, p128)) == 0


def test_unit_lower_triangular_input_is_reproduced_bitwise(rng):
    A = random_dense_pattern_matrix(rng, 5, P256)
    rows = dense_rows(A)
    with P256.context():
        unit_lower = [[rows[i][j] if j < i else (P256.one() if i == j else 0) for j in range(5)] for i in range(5)]
    L = _csr(unit_lower, P256)
    F = ilu0_factorize(L)
    assert F.lu.values == L.values
