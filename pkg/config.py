import os
from dotenv import load_dotenv
load_dotenv()

MIN_PRECISION_BITS = 24
MAX_PRECISION_BITS = 2 ** 24

_raw_prec = os.getenv("MPKRYLOV_DEFAULT_PREC", "512")
try:
    DEFAULT_PRECISION_BITS = int(_raw_prec)
except ValueError:
    raise RuntimeError(f"MPKRYLOV_DEFAULT_PREC={_raw_prec!r} is not an integer number of bits") from None
if not MIN_PRECISION_BITS <= DEFAULT_PRECISION_BITS <= MAX_PRECISION_BITS:
    raise RuntimeError(
        f"MPKRYLOV_DEFAULT_PREC={DEFAULT_PRECISION_BITS} outside "
        f"[{MIN_PRECISION_BITS}, {MAX_PRECISION_BITS}]"
    )

LOG_PATH = os.getenv("MPKRYLOV_LOG_PATH")  # None -> ./logs/mpkrylov.log
CAVITY04_PATH = os.getenv("MPKRYLOV_CAVITY04", os.path.join("data", "cavity04.mtx"))

# Upper bound for the default iteration cap min(10n, MAX_ITER_CAP)
MAX_ITER_CAP = 100000
