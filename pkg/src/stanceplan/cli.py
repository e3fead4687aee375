"""Command line entry point: ``stanceplan {plan,simulate,bench,gen,figures}``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from .errors import (
    DegenerateInput,
    EmptyRegion,
    Infeasible,
    ParseError,
    StancePlanError,
    TimeBudgetExceeded,
    UncoverableTarget,
    Unreachable,
    ValidationError,
)
from .execution_sim import simulate, write_trace
from .figures import emit_figures
from .pipeline import bench_scaling, build_regions, format_bench_table, load_plan, run_pipeline, save_plan
from .planner import build_mip
from .presets import PRESETS, random_scenario
from .scenario import Scenario, dump_scenario, load_scenario, save_scenario

OUT_ENV = "STANCEPLAN_OUT"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VALIDATION = 2
EXIT_INFEASIBLE = 3
EXIT_TIME_BUDGET = 4

log = logging.getLogger("stanceplan")


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ValidationError, ParseError, DegenerateInput)):
        return EXIT_VALIDATION
    if isinstance(exc, (Infeasible, UncoverableTarget, Unreachable, EmptyRegion)):
        return EXIT_INFEASIBLE
    if isinstance(exc, TimeBudgetExceeded):
        return EXIT_TIME_BUDGET
    return EXIT_ERROR


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario(args) -> Scenario:
    scn = load_scenario(args.scenario)
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    return scn


def _write_json(path: Path, data) -> Path:
    path.write_text(json.dumps(data, indent=2) + "\n")
    return path


def cmd_plan(args) -> int:
    scn = _scenario(args)
    out = _out_dir(args)
    run = run_pipeline(scn, run_simulation=False, time_budget=args.time_budget)
    save_plan(run.plan, out / "plan.json")
    save_plan(run.baseline, out / "baseline.json")
    _write_json(out / "report.json", run.report.to_dict())
    if args.lp:
        Path(args.lp).write_text(build_mip(run.problem).to_lp())
    r = run.report
    print(
        f"stops {run.plan.stop_count} (naive {run.baseline.stop_count}); "
        f"estimated {r.mip_estimate:.1f} s vs {r.naive_estimate:.1f} s; "
        f"improvement {r.improvement_ratio:.1%}; {'optimal' if run.plan.optimal else f'gap {run.plan.gap:.3g}'}"
    )
    return EXIT_OK


def cmd_simulate(args) -> int:
    scn = _scenario(args)
    out = _out_dir(args)
    if args.plan:
        plan = load_plan(args.plan)
    else:
        plan = run_pipeline(scn, run_simulation=False, time_budget=args.time_budget).plan
        save_plan(plan, out / "plan.json")
    trace = simulate(plan, scn.gait, seed=scn.seed, single_step_enabled=not args.no_single_step)
    write_trace(trace, out / "trace.txt")
    errs = trace.terminal_errors
    worst = max(errs) if errs else 0.0
    print(f"{len(errs)} stances reached in {trace.total_time:.2f} s; worst terminal error {worst * 1000:.1f} mm")
    return EXIT_OK


def cmd_bench(args) -> int:
    out = _out_dir(args)
    rows = bench_scaling(
        args.sizes,
        args.seeds,
        overlap_prob=args.overlap,
        base_seed=args.seed or 0,
        time_budget=args.time_budget,
        n_samples=args.samples,
    )
    _write_json(out / "bench.json", rows)
    print(format_bench_table(rows))
    return EXIT_OK


def cmd_gen(args) -> int:
    seed = args.seed or 0
    if args.preset:
        scn = PRESETS[args.preset](seed=seed)
    else:
        scn = random_scenario(args.random, seed=seed, overlap_prob=args.overlap)
    if args.output == "-":
        sys.stdout.write(dump_scenario(scn))
    else:
        path = Path(args.output) if args.output else _out_dir(args) / f"{scn.name or 'scenario'}.yaml"
        save_scenario(scn, path)
        print(path)
    return EXIT_OK


def cmd_figures(args) -> int:
    scn = _scenario(args)
    out = _out_dir(args)
    run = run_pipeline(scn, time_budget=args.time_budget)
    save_plan(run.plan, out / "plan.json")
    save_plan(run.baseline, out / "baseline.json")
    write_trace(run.trace, out / "trace.txt")
    files = emit_figures(
        run.plan,
        run.baseline,
        run.trace,
        out,
        regions=run.regions,
        obstacles=scn.obstacles,
        report=run.report.to_dict(),
    )
    for f in files:
        print(f)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stanceplan", description="Standing-position planning for inspection tasks.")
    ap.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    ap.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./out)")
    ap.add_argument("--time-budget", type=float, default=None, help="solver time budget in seconds")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="plan stances for a scenario")
    p.add_argument("scenario")
    p.add_argument("--lp", default=None, help="also write the MIP in LP format to this file")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="simulate walking a plan")
    p.add_argument("scenario")
    p.add_argument("--plan", default=None, help="plan file to execute (default: plan the scenario first)")
    p.add_argument("--no-single-step", action="store_true", help="disable the single-step correction")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bench", help="per-stage timing on random scenarios")
    p.add_argument("--sizes", type=int, nargs="+", default=[10, 20, 30, 40, 50])
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("gen", help="write a preset or random scenario file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--random", type=int, metavar="N")
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("-o", "--output", default=None, help="file path, or - for stdout")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("figures", help="run everything and write SVG figures plus metrics")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_figures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except StancePlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
