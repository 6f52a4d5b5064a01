from .logger import setup_cli_logger
from .splitmix import SplitMix64

__all__ = ["setup_cli_logger", "SplitMix64"]
