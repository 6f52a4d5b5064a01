"""
Reproduction runs on the DRIVCAV cavity04 matrix.

The file is not shipped; point MPKRYLOV_CAVITY04 at a local copy to enable
these tests.
"""
import os
import warnings

import pytest

from config import CAVITY04_PATH
from models.Precision import Precision
from schemas import Method, PreconditionerKind, SolverConfig
from services.matrices import spmv
from services.mp_core import from_ints
from services.mtx_io import read_mtx_file
from services.solvers import solve

if not os.path.isfile(CAVITY04_PATH):
    warnings.warn(f"cavity04 not found at {CAVITY04_PATH}; reproduction tests skipped")
    pytestmark = pytest.mark.skip(reason=f"cavity04 not found at {CAVITY04_PATH}")
else:
    pytestmark = pytest.mark.slow


def _system(bits):
    p = Precision(bits=bits)
    A = read_mtx_file(CAVITY04_PATH, p)
    b = spmv(A, from_ints(range(1, A.rows + 1), p))
    return A, b


def _within(iterations, expected, share=0.15):
    return abs(iterations - expected) <= share * expected


def test_structure():
    A = read_mtx_file(CAVITY04_PATH, Precision(bits=53))
    assert (A.rows, A.cols, A.nnz) == (317, 317, 7327)
    assert round(A.sparsity_percent(), 2) == 92.71


@pytest.mark.parametrize("bits", [512, 1024])
def test_bicg_does_not_converge_at_low_precision(bits):
    A, b = _system(bits)
    report = solve(A, b, cfg=SolverConfig(method=Method.BICG, precision_bits=bits))
    assert not report.converged


def test_bicg_converges_at_2048_bits():
    A, b = _system(2048)
    report = solve(A, b, cfg=SolverConfig(method=Method.BICG, precision_bits=2048))
    assert report.converged
    assert _within(report.iterations, 236)


def test_bicgstab_ilu0_converges_at_2048_bits():
    A, b = _system(2048)
    cfg = SolverConfig(method=Method.BICGSTAB, precision_bits=2048, preconditioner=PreconditionerKind.ILU0)
    report = solve(A, b, cfg=cfg)
    assert report.converged
    assert _within(report.iterations, 274)
