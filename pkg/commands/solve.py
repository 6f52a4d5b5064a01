import logging
import os
import sys
from typing import TextIO

from errors import CliError
from models.MPVector import MPVector
from models.Precision import Precision
from schemas import Method, PreconditionerKind, SolveRequest
from services.matrices import spmv, to_dense
from services.mp_core import from_ints, max_abs_diff
from services.mtx_io import read_mtx_file
from services.solvers import make_preconditioner, solve
from utils.csv_out import write_history_csv

logger = logging.getLogger("mpkrylov.cli.solve")

EXIT_CONVERGED = 0
EXIT_NOT_CONVERGED = 2


def register(subparsers) -> None:
    parser = subparsers.add_parser("solve", help="Solve A x = b with a Krylov method")
    parser.add_argument("--matrix", required=True, help="Matrix Market file")
    parser.add_argument("--method", required=True, choices=[m.value for m in Method])
    parser.add_argument("--prec", default=None, help="Precision in bits, comma-separated for a sweep")
    parser.add_argument("--precond", default="none", choices=[k.value for k in PreconditionerKind])
    parser.add_argument("--rtol", default="1e-20")
    parser.add_argument("--atol", default="1e-50")
    parser.add_argument("--max-iter", type=int, default=None)
    parser.add_argument("--rhs", default="synthetic", choices=["synthetic", "file"])
    parser.add_argument("--rhs-file", default=None, help="n x 1 Matrix Market file, with --rhs file")
    parser.add_argument("--history", default=None, help="Residual history CSV")
    parser.add_argument("--x0", default="zero", choices=["zero"])
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    fields = dict(
        matrix=args.matrix,
        method=args.method,
        precond=args.precond,
        rtol=args.rtol,
        atol=args.atol,
        max_iter=args.max_iter,
        rhs=args.rhs,
        rhs_file=args.rhs_file,
        history=args.history,
        x0=args.x0,
    )
    if args.prec is not None:
        fields["precisions"] = args.prec
    return run(SolveRequest(**fields), sys.stdout)


def history_path(path: str, bits: int, sweep: bool) -> str:
    """One file per precision when sweeping: history.csv -> history_p512.csv."""
    if not sweep:
        return path
    root, ext = os.path.splitext(path)
    return f"{root}_p{bits}{ext or '.csv'}"


def _read_rhs(path: str, p: Precision, n: int) -> MPVector:
    B = to_dense(read_mtx_file(path, p, keep_zeros=True))
    if B.shape != (n, 1):
        raise CliError(1, f"right-hand side {path} is {B.rows}x{B.cols}, expected {n}x1")
    return MPVector(p, B.entries)


def run(req: SolveRequest, out: TextIO) -> int:
    if not os.path.isfile(req.matrix):
        raise CliError(1, f"matrix file not found: {req.matrix}")
    sweep = len(req.precisions) > 1
    exit_code = EXIT_CONVERGED

    for bits in req.precisions:
        p = Precision(bits=bits)
        A = read_mtx_file(req.matrix, p)
        if A.rows != A.cols:
            raise CliError(1, f"matrix must be square, got {A.rows}x{A.cols}")
        n = A.rows

        truth = None
        if req.rhs == "synthetic":
            truth = from_ints(range(1, n + 1), p)
            b = spmv(A, truth)
        else:
            b = _read_rhs(req.rhs_file, p, n)

        cfg = req.config_for(bits)
        K = make_preconditioner(A, cfg.preconditioner)
        report = solve(A, b, None, K, cfg)

        print(f"method={report.method.value} prec={bits} precond={report.preconditioner_name} n={n} nnz={A.nnz}", file=out)
        print(f"  status: {report.status.value}" + (f" ({report.reason})" if report.reason else ""), file=out)
        print(f"  iterations: {report.iterations}", file=out)
        print(f"  wall_seconds: {report.wall_time_seconds:.3f}", file=out)
        print(f"  true_relres: {format(report.final_true_relative_residual(), '.6e')}", file=out)
        if truth is not None:
            print(f"  max_error: {format(max_abs_diff(report.solution, truth), '.6e')}", file=out)

        if req.history:
            path = history_path(req.history, bits, sweep)
            write_history_csv(report, path)
            logger.info("history written to %s", path)

        if not report.converged:
            exit_code = EXIT_NOT_CONVERGED
    return exit_code
