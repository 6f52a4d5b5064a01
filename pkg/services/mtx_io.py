"""
Matrix Market reader/writer.

Values go straight from the decimal text to the target precision with a
single rounding, never through binary64.
"""
import io
import logging
from typing import BinaryIO, List, Optional, TextIO, Tuple, Union

import gmpy2

from errors import MtxBannerError, MtxCountError, MtxIndexError, MtxParseError, MtxUnsupportedError
from models.CsrMatrix import CsrMatrix
from models.Precision import Precision
from schemas import MtxHeader
from services.matrices import coo_to_csr

logger = logging.getLogger("mpkrylov.mtx_io")

BANNER = "%%MatrixMarket"
MIN_WRITE_DIGITS = 17

Source = Union[str, bytes, BinaryIO, TextIO]


def _lines(source: Source) -> List[str]:
    if isinstance(source, bytes):
        return source.decode("utf-8").splitlines()
    if isinstance(source, str):
        return source.splitlines()
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


def parse_header(line: str, line_no: int = 1) -> MtxHeader:
    parts = line.split()
    if not parts or parts[0].lower() != BANNER.lower():
        raise MtxBannerError(line_no, f"expected banner starting with {BANNER}")
    if len(parts) != 5:
        raise MtxBannerError(line_no, "banner must read: %%MatrixMarket object format field symmetry")
    obj, fmt, field, symmetry = (p.lower() for p in parts[1:])
    if obj != "matrix":
        raise MtxUnsupportedError(line_no, f"unsupported object '{obj}'")
    if fmt not in ("coordinate", "array"):
        raise MtxBannerError(line_no, f"unknown format '{fmt}'")
    if field == "complex":
        raise MtxUnsupportedError(line_no, "complex matrices are not supported")
    if field not in ("real", "integer", "pattern"):
        raise MtxUnsupportedError(line_no, f"unsupported field '{field}'")
    if symmetry == "hermitian":
        raise MtxUnsupportedError(line_no, "hermitian symmetry is not supported")
    if symmetry not in ("general", "symmetric", "skew-symmetric"):
        raise MtxUnsupportedError(line_no, f"unsupported symmetry '{symmetry}'")
    if fmt == "array" and field == "pattern":
        raise MtxUnsupportedError(line_no, "pattern field requires coordinate format")
    return MtxHeader(object=obj, format=fmt, field=field, symmetry=symmetry)


def _parse_value(token: str, line_no: int, p: Precision) -> gmpy2.mpfr:
    try:
        value = gmpy2.mpfr(token, p.bits)
    except ValueError:
        raise MtxParseError(line_no, f"invalid numeric value '{token}'")
    if not gmpy2.is_finite(value):
        raise MtxParseError(line_no, f"non-finite value '{token}'")
    return value


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MtxParseError(line_no, f"invalid {what} '{token}'")


def read_mtx(source: Source, p: Precision, keep_zeros: bool = False) -> CsrMatrix:
    """Parse a Matrix Market file into CSR at precision p.

    Symmetric entries are mirrored, skew-symmetric ones mirrored with a sign
    flip, pattern entries read as 1, duplicates summed.
    """
    lines = _lines(source)
    if not lines:
        raise MtxBannerError(1, "empty input")
    header = parse_header(lines[0], 1)

    # comments and blank lines are allowed up to the size line
    pos = 1
    while pos < len(lines):
        stripped = lines[pos].strip()
        if stripped and not stripped.startswith("%"):
            break
        pos += 1
    if pos >= len(lines):
        raise MtxCountError(pos, "missing size line")
    size_no = pos + 1
    size = lines[pos].split()
    pos += 1

    data: List[Tuple[int, List[str]]] = []
    blank_at: Optional[int] = None
    for k in range(pos, len(lines)):
        stripped = lines[k].strip()
        if stripped.startswith("%"):
            continue
        if not stripped:
            if blank_at is None:
                blank_at = k + 1
            continue
        if blank_at is not None:
            raise MtxParseError(blank_at, "blank line inside the data section")
        data.append((k + 1, stripped.split()))

    with p.context():
        if header.format == "coordinate":
            triplets, rows, cols = _read_coordinate(header, size, size_no, data, p)
        else:
            triplets, rows, cols = _read_array(header, size, size_no, data, p)
    A = coo_to_csr(rows, cols, triplets, p, keep_zeros=keep_zeros)
    logger.info("read_mtx: %dx%d %s %s, nnz=%d at %d bits",
                rows, cols, header.field, header.symmetry, A.nnz, p.bits)
    return A


def _mirror(header: MtxHeader, i: int, j: int, v, triplets: list, line_no: int) -> None:
    triplets.append((i, j, v))
    if i == j:
        if header.symmetry == "skew-symmetric" and not gmpy2.is_zero(v):
            raise MtxParseError(line_no, "skew-symmetric matrix with nonzero diagonal entry")
        return
    if header.symmetry == "symmetric":
        triplets.append((j, i, v))
    elif header.symmetry == "skew-symmetric":
        triplets.append((j, i, -v))


def _read_coordinate(header: MtxHeader, size: List[str], size_no: int, data, p: Precision):
    if len(size) != 3:
        raise MtxCountError(size_no, "coordinate size line must hold: rows cols entries")
    rows = _parse_int(size[0], size_no, "row count")
    cols = _parse_int(size[1], size_no, "column count")
    count = _parse_int(size[2], size_no, "entry count")
    if rows < 0 or cols < 0 or count < 0:
        raise MtxCountError(size_no, "negative size")
    if header.symmetry != "general" and rows != cols:
        raise MtxParseError(size_no, f"{header.symmetry} matrix must be square")
    if len(data) != count:
        last = data[-1][0] if data else size_no
        raise MtxCountError(last, f"declared {count} entries, found {len(data)}")

    expected = 2 if header.field == "pattern" else 3
    one = p.one()
    triplets: list = []
    for line_no, tokens in data:
        if len(tokens) != expected:
            raise MtxParseError(line_no, f"expected {expected} fields, found {len(tokens)}")
        i = _parse_int(tokens[0], line_no, "row index")
        j = _parse_int(tokens[1], line_no, "column index")
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MtxIndexError(line_no, f"index ({i}, {j}) outside declared {rows}x{cols}")
        if header.symmetry != "general" and j > i:
            raise MtxIndexError(line_no, f"entry ({i}, {j}) above the diagonal in a {header.symmetry} file")
        v = one if header.field == "pattern" else _parse_value(tokens[2], line_no, p)
        _mirror(header, i - 1, j - 1, v, triplets, line_no)
    return triplets, rows, cols


def _read_array(header: MtxHeader, size: List[str], size_no: int, data, p: Precision):
    if len(size) != 2:
        raise MtxCountError(size_no, "array size line must hold: rows cols")
    rows = _parse_int(size[0], size_no, "row count")
    cols = _parse_int(size[1], size_no, "column count")
    if header.symmetry != "general" and rows != cols:
        raise MtxParseError(size_no, f"{header.symmetry} matrix must be square")

    # column-major; symmetric files list the lower triangle only
    positions = []
    for j in range(cols):
        if header.symmetry == "general":
            start = 0
        elif header.symmetry == "symmetric":
            start = j
        else:
            start = j + 1
        positions.extend((i, j) for i in range(start, rows))
    if len(data) != len(positions):
        last = data[-1][0] if data else size_no
        raise MtxCountError(last, f"expected {len(positions)} array values, found {len(data)}")

    triplets: list = []
    for (line_no, tokens), (i, j) in zip(data, positions):
        if len(tokens) != 1:
            raise MtxParseError(line_no, f"expected 1 field, found {len(tokens)}")
        _mirror(header, i, j, _parse_value(tokens[0], line_no, p), triplets, line_no)
    return triplets, rows, cols


def format_value(v: gmpy2.mpfr, digits: int) -> str:
    """Decimal scientific notation with `digits` significant digits."""
    return format(v, f".{digits - 1}e")


def write_mtx(A: CsrMatrix, digits: int = MIN_WRITE_DIGITS, comment: Optional[str] = None) -> bytes:
    """Serialize as a general coordinate file.

    Lossy above binary64: `digits` significant decimals only.
    """
    if digits < MIN_WRITE_DIGITS:
        raise ValueError(f"digits must be >= {MIN_WRITE_DIGITS}, got {digits}")
    out = io.StringIO()
    out.write(f"{BANNER} matrix coordinate real general\n")
    if comment:
        for line in comment.splitlines():
            out.write(f"% {line}\n")
    out.write(f"{A.rows} {A.cols} {A.nnz}\n")
    for i in range(A.rows):
        for k in A.row_slice(i):
            out.write(f"{i + 1} {A.col_idx[k] + 1} {format_value(A.values[k], digits)}\n")
    return out.getvalue().encode("utf-8")


def read_mtx_file(path: str, p: Precision, keep_zeros: bool = False) -> CsrMatrix:
    with open(path, "rb") as fh:
        return read_mtx(fh, p, keep_zeros=keep_zeros)


def write_mtx_file(A: CsrMatrix, path: str, digits: int = MIN_WRITE_DIGITS, comment: Optional[str] = None) -> None:
    with open(path, "wb") as fh:
        fh.write(write_mtx(A, digits, comment))
