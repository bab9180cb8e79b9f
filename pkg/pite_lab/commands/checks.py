import logging

from pite_lab.commands.common import (
    CommandOutput,
    output_path,
    print_summary,
    resolve_config,
    write_table,
)
from pite_lab.schemas import BoundsConfig, CostConfig
from pite_lab.services import experiment_service
from pite_lab.storage.files import BOUNDS_HEADER, emit_json, emit_outputs

logger = logging.getLogger(__name__)


def register(subparsers, add_common):
    p = subparsers.add_parser("bounds", help="per-eigenvalue bounds, means and amplitude/phase curves")
    add_common(p)
    p.add_argument("--K", type=int, help="override bounds.K")
    p.add_argument("--kappa-bar", type=float, help="override bounds.kappa_bar")
    p.set_defaults(handler=handle_bounds)

    p = subparsers.add_parser("circuit-check", help="gate-built steps against the eigenbasis engine")
    add_common(p)
    p.set_defaults(handler=handle_circuit_check)

    p = subparsers.add_parser("cost", help="step count and cost estimate for a target error")
    add_common(p)
    p.add_argument("--d-pite", type=float, help="circuit depth per step")
    p.add_argument("--w1-sq", type=float, help="initial ground-state weight")
    p.add_argument("--eps-tilde", type=float, help="target error")
    p.set_defaults(handler=handle_cost)


def handle_bounds(args) -> CommandOutput:
    cfg = resolve_config(args, required=False)
    b = cfg.bounds if cfg is not None else BoundsConfig()
    updates = {k: v for k, v in (("K", args.K), ("kappa_bar", args.kappa_bar)) if v is not None}
    if updates:
        b = BoundsConfig.model_validate({**b.model_dump(), **updates})

    rows = experiment_service.bounds_rows(b)
    path = output_path(args, cfg)
    table = write_table(rows, BOUNDS_HEADER, path)
    summary = experiment_service.bounds_summary(b)
    if path is not None:
        emit_outputs(rows, "json", path.with_suffix(".json"))
        print_summary(summary)
    return CommandOutput(table=table, summary=summary, output_path=path)


def handle_circuit_check(args) -> CommandOutput:
    cfg = resolve_config(args)
    report = experiment_service.circuit_check(cfg)
    path = output_path(args, cfg)
    if path is not None:
        emit_json(report, path)
    print(f"max block deviation:  {report['max_block_deviation']:.3e}")
    print(f"max weight deviation: {report['max_weight_deviation']:.3e}")
    print("PASS" if report["passed"] else f"FAIL {report['first_failure'] or ''}".rstrip())
    return CommandOutput(summary=report, output_path=path)


def handle_cost(args) -> CommandOutput:
    cfg = resolve_config(args, required=False)
    c = cfg.cost if cfg is not None else CostConfig()
    updates = {
        k: v
        for k, v in (("d_pite", args.d_pite), ("w1_sq", args.w1_sq), ("eps_tilde", args.eps_tilde))
        if v is not None
    }
    if updates:
        c = CostConfig.model_validate({**c.model_dump(), **updates})
    exp = experiment_service.prepare(cfg) if cfg is not None else None
    summary = experiment_service.cost_summary(c, exp)
    path = output_path(args, cfg)
    if path is not None:
        emit_json(summary, path)
    print(f"K = {summary['K_limit']}")
    print(f"d*K/P_K = {summary['cost']:.6g}")
    return CommandOutput(summary=summary, output_path=path)
