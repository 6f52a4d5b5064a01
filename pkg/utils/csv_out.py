import csv
import io
from typing import Iterable, TextIO

import gmpy2

from schemas import BenchRecord, ScalarBenchResult, SolveReport

HISTORY_HEADER = ["iter", "relres"]
BENCH_HEADER = ["n", "sparsity", "prec_bits", "dense_s", "sparse_s", "speedup", "trials"]
SCALAR_BENCH_HEADER = ["digits", "prec_bits", "half_prec_bits", "trials", "full_mul_s", "half_mul_s", "zero_mul_s"]
RELRES_DIGITS = 30


def format_relres(value) -> str:
    if isinstance(value, gmpy2.mpfr):
        return format(value, f".{RELRES_DIGITS - 1}e")
    return f"{float(value):.{RELRES_DIGITS - 1}e}"


def write_history(report: SolveReport, fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(HISTORY_HEADER)
    for it, ratio in report.residual_history:
        writer.writerow([it, format_relres(ratio)])


def write_history_csv(report: SolveReport, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        write_history(report, fh)


def write_bench(records: Iterable[BenchRecord], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(BENCH_HEADER)
    for rec in records:
        writer.writerow([
            rec.n,
            f"{rec.sparsity_percent:g}",
            rec.precision_bits,
            f"{rec.dense_seconds:.6e}",
            f"{rec.sparse_seconds:.6e}",
            f"{rec.speedup_ratio:.4f}",
            rec.trials,
        ])


def bench_csv_text(records: Iterable[BenchRecord]) -> str:
    buf = io.StringIO()
    write_bench(records, buf)
    return buf.getvalue()


def write_scalar_bench(result: ScalarBenchResult, fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(SCALAR_BENCH_HEADER)
    writer.writerow([
        result.digits10,
        result.precision_bits,
        result.half_precision_bits,
        result.trials,
        f"{result.full_mul_s:.6e}",
        f"{result.half_mul_s:.6e}",
        f"{result.zero_mul_s:.6e}",
    ])
