"""pite-lab command line.

Usage:
  python -m pite_lab spectrum --config data/configs/heisenberg_dos.json --output out/spectrum.csv
  python -m pite_lab sweep --config data/configs/linear_dtau_max.json --window 0.25pi
  python -m pite_lab bounds --K 200 --kappa-bar 0.5 --output out/bounds.csv
  python -m pite_lab cost --w1-sq 0.0009765625 --eps-tilde 1e-2

Exit codes: 0 success, 1 golden mismatch or failed check, 2 config error,
3 numeric error, 4 IO error.
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from pite_lab import __version__
from pite_lab.commands import checks, experiments
from pite_lab.commands.common import add_common_arguments, resolve_config
from pite_lab.config import settings
from pite_lab.errors import ConfigError, PiteLabError
from pite_lab.services.validation_service import compare_files, compare_tables
from pite_lab.storage.database import record_run

logger = logging.getLogger("pite_lab")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pite-lab",
        description="Probabilistic imaginary-time evolution numerical lab",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    experiments.register(subparsers, add_common_arguments)
    checks.register(subparsers, add_common_arguments)
    return parser


def _configure_logging(verbosity: int):
    level = {0: settings.log_level, 1: "INFO"}.get(verbosity, "DEBUG")
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _check_golden(args, out) -> int:
    if out.output_path is not None and out.table is not None:
        verdict = compare_files(out.output_path, args.golden)
    elif out.table is not None:
        try:
            expected = args.golden.read_text()
        except OSError as e:
            raise ConfigError(f"cannot read golden file {args.golden}: {e}") from e
        verdict = compare_tables(out.table, expected)
    else:
        print(f"'{args.command}' emits no table to compare", file=sys.stderr)
        return 1
    if verdict["match"]:
        logger.info("golden %s: %s", args.golden, verdict["feedback"])
        return 0
    print(f"golden mismatch against {args.golden}: {verdict['feedback']}", file=sys.stderr)
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        out = args.handler(args)
        status = 0
        if args.golden is not None:
            status = _check_golden(args, out)
        if out.summary.get("passed") is False:
            status = 1
        if args.record or settings.record_runs:
            cfg = resolve_config(args, required=False)
            record_run(
                command=args.command,
                config=cfg.model_dump(mode="json", by_alias=True) if cfg is not None else {},
                seed=cfg.seed if cfg is not None else 0,
                summary=out.summary,
                output_path=out.output_path,
            )
        return status
    except ValidationError as e:
        print(f"error: invalid arguments: {e}", file=sys.stderr)
        return 2
    except PiteLabError as e:
        logger.debug("command failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
