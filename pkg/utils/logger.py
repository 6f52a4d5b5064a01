import logging
import os
from logging.handlers import RotatingFileHandler


def setup_cli_logger(log_path: str | None = None, verbose: bool = False) -> logging.Logger:
    """Setup and return the application-wide `mpkrylov` logger.

    Creates a rotating file handler at `log_path` (defaults to ./logs/mpkrylov.log).
    Services log through child loggers (`mpkrylov.solvers`, ...) and inherit it.
    """
    if log_path is None:
        logs_dir = os.path.join(os.getcwd(), 'logs')
        os.makedirs(logs_dir, exist_ok=True)
        log_path = os.path.join(logs_dir, 'mpkrylov.log')
    else:
        parent = os.path.dirname(os.path.abspath(log_path))
        os.makedirs(parent, exist_ok=True)

    logger = logging.getLogger('mpkrylov')
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)

    # avoid adding multiple handlers if called multiple times
    if not logger.handlers:
        handler = RotatingFileHandler(log_path, maxBytes=5 * 1024 * 1024, backupCount=5, encoding='utf-8')
        formatter = logging.Formatter('%(asctime)s [%(levelname)s] %(name)s: %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger
