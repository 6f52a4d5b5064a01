import sys
from typing import TextIO

from errors import CliError
from models.Precision import Precision
from schemas import InfoRequest
from services.matrices import estimate_memory
from services.mtx_io import read_mtx_file


def register(subparsers) -> None:
    parser = subparsers.add_parser("info", help="Size, sparsity and storage estimate of a Matrix Market file")
    parser.add_argument("--matrix", required=True)
    parser.add_argument("--prec", default=None, help="Comma-separated precisions in bits")
    parser.add_argument("--header-bytes", type=int, default=0, help="Per-element bookkeeping bytes")
    parser.set_defaults(handler=handle)


def handle(args) -> int:
    fields = dict(matrix=args.matrix, header_bytes=args.header_bytes)
    if args.prec is not None:
        fields["precisions"] = args.prec
    return run(InfoRequest(**fields), sys.stdout)


def run(req: InfoRequest, out: TextIO) -> int:
    try:
        A = read_mtx_file(req.matrix, Precision(bits=min(req.precisions)))
    except FileNotFoundError:
        raise CliError(1, f"matrix file not found: {req.matrix}")

    print(f"matrix: {req.matrix}", file=out)
    print(f"n: {A.rows}" if A.rows == A.cols else f"shape: {A.rows}x{A.cols}", file=out)
    print(f"nnz: {A.nnz}", file=out)
    print(f"sparsity: {A.sparsity_percent():.2f}%", file=out)
    print("prec_bits,header_bytes,dense_bytes,sparse_bytes,sparse_payload_bytes,index_bytes", file=out)
    for bits in req.precisions:
        m = estimate_memory(A.rows, A.nnz, bits, req.header_bytes)
        print(f"{m.precision_bits},{m.header_bytes},{m.dense_bytes},{m.sparse_bytes},"
              f"{m.sparse_payload_bytes},{m.index_bytes}", file=out)
    return 0
