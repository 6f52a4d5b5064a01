"""
Timing harness for the dense-vs-sparse speedup study and the scalar
multiplication micro-benchmark.

Only the products are timed. Every configuration is checked for bitwise
agreement between dense and sparse results before any timing starts.
"""
import itertools
import logging
import math
import time
from typing import Callable, Iterable, List, Sequence, Tuple

import gmpy2
import numpy as np

from errors import VerificationError
from models.Precision import Precision
from schemas import BenchRecord, ScalarBenchResult
from services.matrices import dense_mv, gen_lotkin, sparsify, spmv, to_dense
from services.mp_core import from_ints

logger = logging.getLogger("mpkrylov.bench")

MIN_TRIALS = 3
MIN_DIGITS10 = 100
LOG2_10 = math.log2(10)


def median_seconds(fn: Callable[[], object], trials: int, warmup: int = 1) -> Tuple[float, List[float]]:
    """Warm up, then time `trials` calls with a monotonic clock; (median, samples)."""
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(trials):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return float(np.median(samples)), samples


def spmv_bench_one(n: int, s: float, bits: int, trials: int, seed: int) -> BenchRecord:
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    p = Precision(bits=bits)
    A = sparsify(gen_lotkin(n, p), s, seed)
    A_dense = to_dense(A)
    b = spmv(A, from_ints(range(1, n + 1), p))

    dense_y = dense_mv(A_dense, b)
    sparse_y = spmv(A, b)
    if not dense_y.bit_equal(sparse_y):
        logger.error("verification failed: n=%d s=%s prec=%d", n, s, bits)
        raise VerificationError(f"dense and sparse products differ (n={n}, s={s}, prec={bits})")

    dense_s, dense_samples = median_seconds(lambda: dense_mv(A_dense, b), trials)
    sparse_s, sparse_samples = median_seconds(lambda: spmv(A, b), trials)
    # a sub-resolution timer sample would make the ratio meaningless
    sparse_s = max(sparse_s, 1e-9)
    dense_s = max(dense_s, 1e-9)
    record = BenchRecord(
        n=n,
        sparsity_percent=s,
        precision_bits=bits,
        nnz=A.nnz,
        dense_seconds=dense_s,
        sparse_seconds=sparse_s,
        speedup_ratio=dense_s / sparse_s,
        trials=trials,
        dense_samples=dense_samples,
        sparse_samples=sparse_samples,
    )
    logger.info("spmv_bench n=%d s=%s prec=%d nnz=%d dense=%.4es sparse=%.4es ratio=%.3f",
                n, s, bits, A.nnz, dense_s, sparse_s, record.speedup_ratio)
    return record


def spmv_bench(n_list: Sequence[int], s_list: Sequence[float], p_list: Sequence[int],
               trials: int = 5, seed: int = 0) -> List[BenchRecord]:
    """One record per (n, s, p) of the cross product, in that nesting order."""
    return [spmv_bench_one(n, s, bits, trials, seed)
            for n, s, bits in itertools.product(n_list, s_list, p_list)]


def digits_to_bits(digits10: int) -> int:
    return int(math.ceil(digits10 * LOG2_10))


def scalar_microbench(digits10: int = 10000, trials: int = 5, repeat: int = 100) -> ScalarBenchResult:
    """Time x*y at full precision, half_x*half_y at half the digits, and 0*x.

    Each sample times `repeat` multiplications; medians are per multiplication.
    """
    if digits10 < MIN_DIGITS10:
        raise ValueError(f"digits10 must be >= {MIN_DIGITS10}, got {digits10}")
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}, got {trials}")
    full = Precision(bits=digits_to_bits(digits10))
    half = Precision(bits=digits_to_bits(digits10 // 2))

    with full.context():
        x = gmpy2.sqrt(gmpy2.mpfr(2))
        y = gmpy2.sqrt(gmpy2.mpfr(3))
        zero = full.zero()
    with half.context():
        half_x = gmpy2.sqrt(gmpy2.mpfr(2))
        half_y = gmpy2.sqrt(gmpy2.mpfr(3))

    def timed(ctx_p: Precision, a, b) -> float:
        def run():
            with ctx_p.context():
                for _ in range(repeat):
                    a * b
        med, _ = median_seconds(run, trials)
        return med / repeat

    result = ScalarBenchResult(
        digits10=digits10,
        precision_bits=full.bits,
        half_precision_bits=half.bits,
        full_mul_s=timed(full, x, y),
        half_mul_s=timed(half, half_x, half_y),
        zero_mul_s=timed(full, zero, x),
        trials=trials,
    )
    logger.info("scalar_microbench digits=%d: full=%.3es half=%.3es zero=%.3es",
                digits10, result.full_mul_s, result.half_mul_s, result.zero_mul_s)
    return result


def grid_size(*lists: Iterable) -> int:
    return math.prod(len(list(l)) for l in lists)
