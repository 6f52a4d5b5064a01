"""
Exception hierarchy shared by the services and the CLI.

Domain errors carry enough context (row, line number) for the CLI handlers
in main.py to print a useful message without a traceback.
"""
from typing import Optional


class MPKrylovError(Exception):
    """Base class for every error raised by the library."""


# ---------- Contract violations ----------
class DimensionMismatchError(MPKrylovError, ValueError):
    def __init__(self, what: str, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"{what}: dimension mismatch ({left} vs {right})")


class PrecisionMismatchError(MPKrylovError, ValueError):
    def __init__(self, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"precision mismatch ({left} bits vs {right} bits)")


class NonFiniteInputError(MPKrylovError, ValueError):
    pass


class StructureError(MPKrylovError, ValueError):
    """A CSR structural invariant does not hold."""


# ---------- Matrix Market ----------
class MtxParseError(MPKrylovError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class MtxBannerError(MtxParseError):
    pass


class MtxIndexError(MtxParseError):
    pass


class MtxCountError(MtxParseError):
    pass


class MtxUnsupportedError(MtxParseError):
    pass


# ---------- Preconditioning ----------
class PreconditionerError(MPKrylovError):
    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(message)


class MissingDiagonalError(PreconditionerError):
    def __init__(self, row: int):
        super().__init__(row, f"ILU(0): row {row} has no structural diagonal entry")


class ZeroPivotError(PreconditionerError):
    def __init__(self, row: int):
        super().__init__(row, f"ILU(0): zero pivot in row {row}")


# ---------- Bench ----------
class VerificationError(MPKrylovError):
    """Dense and sparse products disagree; the kernel is wrong."""


# ---------- CLI ----------
class CliError(MPKrylovError):
    """Terminates a command with `exit_code`, like an HTTP error response."""

    def __init__(self, exit_code: int, detail: Optional[str] = None):
        self.exit_code = exit_code
        self.detail = detail
        super().__init__(detail or f"exit {exit_code}")
