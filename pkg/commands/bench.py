import logging
import sys
from typing import TextIO

from config import DEFAULT_PRECISION_BITS
from schemas import BenchScalarRequest, BenchSpmvRequest
from services.bench import grid_size, scalar_microbench, spmv_bench
from utils.csv_out import bench_csv_text, write_scalar_bench

logger = logging.getLogger("mpkrylov.cli.bench")


def register(subparsers) -> None:
    spmv_parser = subparsers.add_parser("bench-spmv", help="Dense vs sparse product timing on sparsified Lotkin matrices")
    spmv_parser.add_argument("--n", required=True, help="Comma-separated dimensions")
    spmv_parser.add_argument("--sparsity", required=True, help="Comma-separated percentages in [0, 100)")
    spmv_parser.add_argument("--prec", default=str(DEFAULT_PRECISION_BITS), help="Comma-separated precisions in bits")
    spmv_parser.add_argument("--trials", type=int, default=5)
    spmv_parser.add_argument("--seed", type=int, default=0)
    spmv_parser.add_argument("--out", default=None, help="CSV file; stdout when omitted")
    spmv_parser.set_defaults(handler=handle_spmv)

    scalar_parser = subparsers.add_parser("bench-scalar", help="Scalar multiplication timing at full, half and zero operands")
    scalar_parser.add_argument("--digits", type=int, default=10000, help="Decimal digits of the full precision")
    scalar_parser.add_argument("--trials", type=int, default=5)
    scalar_parser.add_argument("--repeat", type=int, default=100, help="Multiplications per sample")
    scalar_parser.add_argument("--out", default=None, help="CSV file; plain text on stdout when omitted")
    scalar_parser.set_defaults(handler=handle_scalar)


def handle_spmv(args) -> int:
    req = BenchSpmvRequest(n=args.n, sparsity=args.sparsity, precisions=args.prec,
                           trials=args.trials, seed=args.seed, out=args.out)
    return run_spmv(req, sys.stdout)


def run_spmv(req: BenchSpmvRequest, out: TextIO) -> int:
    logger.info("bench-spmv: %d configurations, %d trials, seed=%d",
                grid_size(req.n, req.sparsity, req.precisions), req.trials, req.seed)
    records = spmv_bench(req.n, req.sparsity, req.precisions, trials=req.trials, seed=req.seed)
    for rec in records:
        logger.debug("samples n=%d s=%g prec=%d dense=%s sparse=%s",
                     rec.n, rec.sparsity_percent, rec.precision_bits, rec.dense_samples, rec.sparse_samples)
    text = bench_csv_text(records)
    if req.out:
        with open(req.out, "w", newline="", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {len(records)} rows to {req.out}", file=out)
    else:
        out.write(text)
    return 0


def handle_scalar(args) -> int:
    out = sys.stdout
    req = BenchScalarRequest(digits=args.digits, trials=args.trials, repeat=args.repeat, out=args.out)
    result = scalar_microbench(req.digits, trials=req.trials, repeat=req.repeat)
    if req.out:
        with open(req.out, "w", newline="", encoding="utf-8") as fh:
            write_scalar_bench(result, fh)
        print(f"wrote 1 row to {req.out}", file=out)
        return 0
    print(f"digits={result.digits10} prec={result.precision_bits} bits "
          f"half_prec={result.half_precision_bits} bits trials={result.trials}", file=out)
    print(f"  x*y       {result.full_mul_s:.6e} s", file=out)
    print(f"  half x*y  {result.half_mul_s:.6e} s", file=out)
    print(f"  0*x       {result.zero_mul_s:.6e} s", file=out)
    return 0
