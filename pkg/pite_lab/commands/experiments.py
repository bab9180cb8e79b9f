import logging
import math

from pite_lab.commands.common import (
    CommandOutput,
    output_path,
    pi_float,
    print_summary,
    resolve_config,
    thread_count,
    write_table,
)
from pite_lab.services import experiment_service, sweep_service
from pite_lab.storage.files import (
    DOS_HEADER,
    SAMPLE_HEADER,
    SPECTRUM_HEADER,
    SWEEP_HEADER,
    WINDOW_HEADER,
    dos_rows,
    emit_json,
    emit_outputs,
    sibling,
    spectrum_rows,
)

logger = logging.getLogger(__name__)


def register(subparsers, add_common):
    p = subparsers.add_parser("spectrum", help="diagonalize the system and bin its density of states")
    add_common(p)
    p.set_defaults(handler=handle_spectrum)

    p = subparsers.add_parser("run", help="single PITE run in the eigenbasis")
    add_common(p)
    p.add_argument("--alphas", help="comma-separated energy-shift interpolations, e.g. 0,0.5,1")
    p.add_argument("--damping", action="store_true", help="include per-eigenvalue damping factors")
    p.set_defaults(handler=handle_run)

    p = subparsers.add_parser("sweep", help="parameter sweep; one CSV row per grid point")
    add_common(p)
    p.add_argument("--window", type=pi_float, help="±window statistics around the analytic minimum, e.g. 0.25pi")
    p.add_argument("--window-centre", type=pi_float, help="centre the window here instead, in sweep-axis units")
    p.set_defaults(handler=handle_sweep)

    p = subparsers.add_parser("sample", help="Monte Carlo ancilla-measurement trajectories")
    add_common(p)
    p.add_argument("--shots", type=int, help="override sample.shots")
    p.set_defaults(handler=handle_sample)


def handle_spectrum(args) -> CommandOutput:
    cfg = resolve_config(args)
    exp, dos = experiment_service.spectrum_report(cfg)
    path = output_path(args, cfg)
    table = write_table(spectrum_rows(exp.spectrum, exp.weights.weights), SPECTRUM_HEADER, path)
    if path is not None:
        emit_outputs(dos_rows(dos), "csv", sibling(path, "_dos"), DOS_HEADER)
    summary = {
        "system": exp.label,
        "dimension": len(exp.spectrum),
        "ground_energy": exp.spectrum.ground_energy,
        "gap_min": exp.spectrum.gap_min if len(exp.spectrum) > 1 else None,
        "gap_max": exp.spectrum.gap_max if len(exp.spectrum) > 1 else None,
        "dos_bins": int(dos.counts.size),
    }
    if path is not None:
        print_summary(summary)
    return CommandOutput(table=table, summary=summary, output_path=path)


def handle_run(args) -> CommandOutput:
    cfg = resolve_config(args)
    exp = experiment_service.prepare(cfg)
    result, summary = experiment_service.run_single(cfg, exp)
    if args.damping:
        summary["damping"] = result.damping.tolist()
    if args.alphas:
        alphas = [float(a) for a in args.alphas.split(",") if a.strip()]
        summary["alpha_sweep"] = experiment_service.run_alpha_sweep(cfg, alphas, exp)
    path = output_path(args, cfg)
    if path is not None:
        emit_json(summary, path)
    print_summary(summary)
    return CommandOutput(summary=summary, output_path=path)


def handle_sweep(args) -> CommandOutput:
    cfg = resolve_config(args)
    exp = experiment_service.prepare(cfg)
    rows = sweep_service.run_sweep(cfg, threads=thread_count(args), exp=exp)
    path = output_path(args, cfg)
    table = write_table(rows, SWEEP_HEADER, path)
    if path is not None:
        emit_outputs(rows, "json", path.with_suffix(".json"))

    summary = {"param": cfg.sweep.param, "points": len(rows), "seed": cfg.seed}
    finite = [r for r in rows if math.isfinite(r["ln_error_tilde"])]
    if finite:
        best = min(finite, key=lambda r: r["ln_error_tilde"])
        summary["minimum"] = {"value": best["value"], "ln_error_tilde": best["ln_error_tilde"]}
    if args.window is not None:
        centre = args.window_centre
        if centre is None:
            centre = sweep_service.window_centre(cfg, exp)
        stats = sweep_service.window_statistics(rows, args.window, centre)
        summary["window"] = stats
        if path is not None:
            emit_outputs([stats], "csv", sibling(path, "_window"), WINDOW_HEADER)
    if path is not None:
        print_summary(summary)
    return CommandOutput(table=table, summary=summary, output_path=path)


def handle_sample(args) -> CommandOutput:
    cfg = resolve_config(args)
    if args.shots is not None:
        cfg = cfg.model_copy(update={"sample": cfg.sample.model_copy(update={"shots": args.shots})})
    stats = experiment_service.sample(cfg, threads=thread_count(args))
    path = output_path(args, cfg)
    table = write_table(stats.rows(), SAMPLE_HEADER, path)
    summary = stats.summary()
    if path is not None:
        emit_json(summary, sibling(path, "_summary", ".json"))
        print_summary(summary)
    return CommandOutput(table=table, summary=summary, output_path=path)
