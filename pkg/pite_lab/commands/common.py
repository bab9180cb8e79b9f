"""Plumbing shared by every subcommand: config loading, flag overrides, output."""

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from pite_lab.config import settings
from pite_lab.errors import ConfigError
from pite_lab.schemas import RunConfig, load_config, parse_pi
from pite_lab.storage.files import render_csv, render_json, emit_outputs

logger = logging.getLogger(__name__)


@dataclass
class CommandOutput:
    """What a handler produced: the primary table text and a JSON-able summary."""

    table: str | None = None
    summary: dict = field(default_factory=dict)
    output_path: Path | None = None


def add_common_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--config", type=Path, help="JSON experiment config")
    parser.add_argument("--output", type=Path, help="output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--threads", type=int, help="worker threads (default: PITE_LAB_THREADS or 1)")
    parser.add_argument("--golden", type=Path, help="compare the emitted table against this golden CSV")
    parser.add_argument("--record", action="store_true", help="store the run in the SQLModel run ledger")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def pi_float(text: str) -> float:
    try:
        return float(parse_pi(text))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def resolve_config(args, required: bool = True) -> RunConfig | None:
    if args.config is None:
        if required:
            raise ConfigError(f"'{args.command}' needs --config")
        return None
    cfg = load_config(args.config)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.output is not None:
        updates["output"] = args.output
    return cfg.model_copy(update=updates) if updates else cfg


def thread_count(args) -> int:
    threads = args.threads if args.threads is not None else settings.threads
    if threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {threads}")
    return threads


def output_path(args, cfg: RunConfig | None) -> Path | None:
    if args.output is not None:
        return args.output
    return cfg.output if cfg is not None else None


def write_table(rows: list[dict], header: list[str], path: Path | None) -> str:
    """Write rows to path as CSV, or to stdout when no path is set. Returns the CSV text."""
    text = render_csv(rows, header)
    if path is None:
        sys.stdout.write(text)
    else:
        emit_outputs(rows, "csv", path, header)
    return text


def print_summary(summary: dict):
    sys.stdout.write(render_json(summary))
