import argparse
import sys
import traceback
from typing import List, Optional

from pydantic import ValidationError

from config import LOG_PATH
from errors import CliError, MPKrylovError
from utils.logger import setup_cli_logger

from commands import (
    solve,
    bench,
    generate,
    info,
)

EXIT_USAGE = 1


class CliParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors share the handlers below."""

    def error(self, message):
        raise CliError(EXIT_USAGE, f"{self.prog}: {message}")


def build_parser() -> CliParser:
    parser = CliParser(prog="mpkrylov", description="Multiple-precision sparse Krylov solvers and SpMV benchmarks")
    parser.add_argument("--verbose", action="store_true", help="Log every iteration at DEBUG")
    parser.add_argument("--log-file", default=LOG_PATH, help="Rotating log file (default ./logs/mpkrylov.log)")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    solve.register(subparsers)
    bench.register(subparsers)
    generate.register(subparsers)
    info.register(subparsers)
    return parser


def _describe_validation(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err.get("loc", ())) or "request"
        parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    log_path = LOG_PATH
    verbose = "--verbose" in argv
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        log_path, verbose = args.log_file, args.verbose
        cli_logger = setup_cli_logger(log_path, verbose=verbose)
        cli_logger.info("command %s | argv=%s", args.command, argv)
        return args.handler(args)
    except CliError as exc:
        setup_cli_logger(log_path, verbose=verbose).warning(
            "CliError | exit=%s | argv=%s | detail=%s", exc.exit_code, argv, exc.detail)
        if exc.detail:
            print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        detail = _describe_validation(exc)
        setup_cli_logger(log_path, verbose=verbose).warning("invalid arguments | argv=%s | %s", argv, detail)
        print(f"error: invalid arguments: {detail}", file=sys.stderr)
        return EXIT_USAGE
    except (MPKrylovError, OSError) as exc:
        setup_cli_logger(log_path, verbose=verbose).error(
            "%s | argv=%s | %s", type(exc).__name__, argv, exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        setup_cli_logger(log_path, verbose=verbose).error(
            "Unhandled exception | argv=%s | error=%s\n%s", argv, exc, traceback.format_exc())
        print("error: internal error, see log file", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
