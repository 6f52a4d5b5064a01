import logging
import sys
from typing import TextIO

from config import DEFAULT_PRECISION_BITS
from models.Precision import Precision
from schemas import GenLotkinRequest
from services.matrices import gen_lotkin_sparse
from services.mtx_io import write_mtx_file

logger = logging.getLogger("mpkrylov.cli.generate")

BINARY64_BITS = 53


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen-lotkin", help="Write a randomly sparsified Lotkin matrix as Matrix Market")
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--sparsity", type=float, default=0.0, help="Percentage of entries set to zero")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--digits", type=int, default=17, help="Significant decimal digits per value")
    parser.add_argument("--prec", type=int, default=DEFAULT_PRECISION_BITS, help="Generation precision in bits")
    parser.add_argument("--out", required=True)
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    req = GenLotkinRequest(n=args.n, sparsity=args.sparsity, seed=args.seed,
                           digits=args.digits, out=args.out, precision_bits=args.prec)
    return run(req, sys.stdout, sys.stderr)


def run(req: GenLotkinRequest, out: TextIO, err: TextIO) -> int:
    p = Precision(bits=req.precision_bits)
    A = gen_lotkin_sparse(req.n, req.sparsity, req.seed, p)
    comment = f"Lotkin n={req.n} sparsity={req.sparsity:g} seed={req.seed} prec={p.bits}"
    write_mtx_file(A, req.out, digits=req.digits, comment=comment)
    if p.bits > BINARY64_BITS and req.digits < p.decimal_digits():
        print(f"warning: {req.out} holds {req.digits} significant digits; reading it back at "
              f"{p.bits} bits does not reproduce the generated matrix, use gen_lotkin_sparse in-process",
              file=err)
    logger.info("gen-lotkin: wrote %s (n=%d nnz=%d)", req.out, A.rows, A.nnz)
    print(f"wrote {req.out}: n={A.rows} nnz={A.nnz}", file=out)
    return 0
