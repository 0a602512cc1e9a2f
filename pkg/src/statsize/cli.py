"""Command-line entry point.

Exit codes: 0 ok, 2 I/O error, 3 parse error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .cell_library import LibraryError, VariationModel, read_library
from .config import PRUNE_RULES, ConfigError, RunConfig, load_config, resolve_netlist
from .mc_oracle import sample_circuit_delays, validate_bound
from .netlist_io import BenchParseError, read_bench
from .sizer import MODES, SizerConfig, optimize
from .ssta_engine import TimingModel
from .stat_dist import percentile
from .timing_graph import CycleError

EXIT_OK, EXIT_IO, EXIT_PARSE, EXIT_VERIFY = 0, 2, 3, 4
MC_LEVELS = (0.5, 0.9, 0.95, 0.99)

log = logging.getLogger("statsize")


class CliError(Exception):
    def __init__(self, msg, code):
        super().__init__(msg)
        self.code = code


# config plumbing --------------------------------------------------------------

# CLI flag dest -> RunConfig field
_OVERRIDES = {
    "netlist": "netlist", "lib": "library", "bin_width": "bin_width",
    "sigma_frac": "sigma_frac", "trunc_k": "trunc_k", "po_load": "po_load",
    "p": "p", "dw": "delta_w", "mode": "mode", "max_iters": "max_iterations",
    "area_budget": "area_budget", "w_max": "w_max", "verify": "verify",
    "prune": "prune", "seed": "seed", "samples": "mc_samples", "report": "report", "curve": "curve",
    "output": "output",
}


def config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        try:
            cfg = load_config(args.config)
        except OSError:
            raise CliError(f"config not found: {args.config}", EXIT_IO) from None
        except ConfigError as e:
            raise CliError(f"{args.config}: {e}", EXIT_PARSE) from None
    kw = {}
    for dest, name in _OVERRIDES.items():
        v = getattr(args, dest, None)
        if v is not None and v is not False:
            kw[name] = v
    try:
        return cfg.replace(**kw).validate()
    except ConfigError as e:
        raise CliError(str(e), EXIT_PARSE) from None


def build_model(cfg: RunConfig) -> TimingModel:
    if not cfg.netlist:
        raise CliError("no netlist given", EXIT_IO)
    lib_path = Path(cfg.library)
    if not lib_path.is_file():
        raise CliError(f"library not found: {cfg.library}", EXIT_IO)
    net_path = resolve_netlist(cfg.netlist)
    if not net_path.is_file():
        raise CliError(f"netlist not found: {cfg.netlist}", EXIT_IO)
    try:
        library = read_library(lib_path)
    except LibraryError as e:
        raise CliError(f"{lib_path}: {e}", EXIT_PARSE) from None
    try:
        netlist = read_bench(net_path)
    except BenchParseError as e:
        raise CliError(f"{net_path}: {e}", EXIT_PARSE) from None
    try:
        return TimingModel(netlist, library, VariationModel(cfg.sigma_frac, cfg.trunc_k),
                           cfg.bin_width, cfg.po_load)
    except CycleError as e:
        raise CliError(f"{net_path}: {e}", EXIT_PARSE) from None
    except (KeyError, ValueError) as e:
        raise CliError(f"{net_path}: {e}", EXIT_PARSE) from None


def sizer_config(cfg: RunConfig, mode: str = None) -> SizerConfig:
    return SizerConfig(p=cfg.p, delta_w=cfg.delta_w, max_iterations=cfg.max_iterations,
                       area_budget=cfg.area_budget, mode=mode or cfg.mode,
                       w_max=cfg.w_max, verify=cfg.verify,
                       prune_guard=cfg.prune == "guarded")


def _write(path, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise CliError(f"cannot write {path}: {e.strerror}", EXIT_IO) from None


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# subcommands ------------------------------------------------------------------

def cmd_ssta(cfg: RunConfig, args) -> int:
    model = build_model(cfg)
    res = model.ssta()
    _write(cfg.output, res.sink.to_csv())
    if args.nodes:
        rows = ["node,mean,std,t50,t99"]
        for i, a in enumerate(res.arrival):
            rows.append(f"{model.graph.names[i]},{a.mean():.9g},{a.std():.9g},"
                        f"{percentile(a, 0.5):.9g},{percentile(a, 0.99):.9g}")
        _write(args.nodes, "\n".join(rows) + "\n")
    log.info("T(%.2f) = %.6g", cfg.p, percentile(res.sink, cfg.p))
    return EXIT_OK


def _iteration_line(rec) -> str:
    s = "-" if rec.sensitivity is None else f"{rec.sensitivity:.9g}"
    return f"iter {rec.iteration} gate {rec.gate} S {s} area {rec.area:.9g} t {rec.t99:.9g} ops {rec.op_count}"


def cmd_optimize(cfg: RunConfig, args) -> int:
    model = build_model(cfg)
    lines = []

    def on_iter(rec):
        lines.append(_iteration_line(rec))
        log.debug(lines[-1])

    run = optimize(model, sizer_config(cfg), callback=on_iter)
    if args.log:
        _write(args.log, "\n".join(lines) + ("\n" if lines else ""))
    if cfg.report:
        _write(cfg.report, _json(run.to_dict(include_runtime=args.runtime)))
    if cfg.curve:
        _write(cfg.curve, run.curve_csv())
    last = run.records[-1]
    log.info("%s: %d iterations (%s), area %.6g, T(%.2f) %.6g",
             run.mode, run.iterations, run.stop_reason, last.area, cfg.p, last.t99)
    if run.mismatches:
        log.error("%d pruned/brute-force mismatches", len(run.mismatches))
        return EXIT_VERIFY
    return EXIT_OK


def cmd_montecarlo(cfg: RunConfig, args) -> int:
    model = build_model(cfg)
    res = model.ssta()
    mc = sample_circuit_delays(model, n=cfg.mc_samples, seed=cfg.seed)
    rows = ["p,t_mc,t_ssta,gap"]
    for p in MC_LEVELS:
        if cfg.mc_samples < 1.0 / (1.0 - p):
            continue
        v = validate_bound(res, mc, p)
        rows.append(f"{p},{v['t_mc']:.9g},{v['t_ssta']:.9g},{v['gap_fraction']:.9g}")
    _write(cfg.output, "\n".join(rows) + "\n")
    return EXIT_OK


def interpolate_curve(run, area: float) -> float:
    """t at ``area`` by linear interpolation on the run's (area, t) curve."""
    a = np.array([r.area for r in run.records])
    t = np.array([r.t99 for r in run.records])
    return float(np.interp(area, a, t))


def matched_area_comparison(det, stat) -> dict:
    """Align two runs at equal area and report the statistical improvement.

    The comparison point is the largest area both runs reached; values off a
    run's own sample points are linearly interpolated on its curve.
    """
    area = min(det.records[-1].area, stat.records[-1].area)
    t_det, t_stat = interpolate_curve(det, area), interpolate_curve(stat, area)
    points = sorted({r.area for r in det.records + stat.records if r.area <= area})
    per_area = [
        {"area": a, "t_det": interpolate_curve(det, a), "t_stat": interpolate_curve(stat, a)}
        for a in points
    ]
    return {
        "area": area,
        "t_det": t_det,
        "t_stat": t_stat,
        "improvement_pct": 100.0 * (t_det - t_stat) / t_det if t_det else 0.0,
        "curve": per_area,
    }


def cmd_compare(cfg: RunConfig, args) -> int:
    model = build_model(cfg)
    det = optimize(model, sizer_config(cfg, "det"))
    stat_cfg = sizer_config(cfg, "stat")
    stat_cfg.verify = True  # brute-force counts give the work-reduction factors
    stat = optimize(model, stat_cfg)
    cmp = matched_area_comparison(det, stat)
    ratios = [
        {"iteration": r.iteration, "pruned_ops": r.op_count, "brute_ops": r.brute_op_count,
         "factor": r.brute_op_count / r.op_count if r.op_count else None}
        for r in stat.records[1:]
    ]
    total_pruned = stat.op_count
    report = {
        "netlist": Path(cfg.netlist).name,
        "p": cfg.p,
        "det": {"iterations": det.iterations, "stop_reason": det.stop_reason,
                "final_area": det.records[-1].area, "final_t": det.records[-1].t99},
        "stat": {"iterations": stat.iterations, "stop_reason": stat.stop_reason,
                 "final_area": stat.records[-1].area, "final_t": stat.records[-1].t99},
        "matched_area": cmp,
        "ops": {
            "pruned": total_pruned,
            "brute": stat.brute_op_count,
            "factor": (stat.brute_op_count / total_pruned) if total_pruned else None,
            "per_iteration": ratios,
        },
        "mismatches": stat.mismatches,
    }
    _write(cfg.report or cfg.output, _json(report))
    log.info("improvement at area %.6g: %.3f%%", cmp["area"], cmp["improvement_pct"])
    return EXIT_VERIFY if stat.mismatches else EXIT_OK


def cmd_dump_graph(cfg: RunConfig, args) -> int:
    model = build_model(cfg)
    _write(cfg.output, model.graph.to_dot())
    return EXIT_OK


# argument parsing -------------------------------------------------------------

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("netlist", nargs="?", help=".bench file (or the name of a shipped benchmark)")
    p.add_argument("--config", help="key = value run configuration file")
    p.add_argument("--lib", help="cell library file")
    p.add_argument("--bin-width", type=float)
    p.add_argument("--sigma-frac", type=float)
    p.add_argument("--trunc-k", type=float)
    p.add_argument("--po-load", type=float)
    p.add_argument("--p", type=float, help="objective percentile")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("-v", "--verbose", action="count", default=0)


def _sizing(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dw", type=float, help="size increment per iteration")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--area-budget", type=float, help="allowed fractional area increase")
    p.add_argument("--w-max", type=float)
    p.add_argument("--prune", choices=PRUNE_RULES,
                   help="strict (default) or guarded: keep fronts within one bin of the best")
    p.add_argument("--report", help="JSON report path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="statsize", description="Statistical timing analysis and gate sizing.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ssta", help="run SSTA and write the sink distribution")
    _common(p)
    p.add_argument("--nodes", help="also write per-node mean/std/percentiles CSV")
    p.set_defaults(func=cmd_ssta)

    p = sub.add_parser("optimize", help="size gates")
    _common(p)
    _sizing(p)
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--verify", action="store_true", help="check every choice against brute force")
    p.add_argument("--seed", type=int)
    p.add_argument("--curve", help="area-delay curve CSV path")
    p.add_argument("--log", help="per-iteration log path")
    p.add_argument("--runtime", action="store_true", help="include wall-clock runtime in the report")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("montecarlo", help="compare SSTA percentiles with Monte Carlo")
    _common(p)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("compare", help="deterministic vs statistical sizing at matched area")
    _common(p)
    _sizing(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("dump-graph", help="write the timing graph as DOT")
    _common(p)
    p.set_defaults(func=cmd_dump_graph)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = config_from_args(args)
        return args.func(cfg, args)
    except CliError as e:
        print(f"statsize: {e}", file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
