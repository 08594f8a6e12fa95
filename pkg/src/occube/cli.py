"""Command line interface: serve the API, run scripts, generate logs, benchmark."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from occube.errors import OccubeError


def _parse_levels(text: str) -> list[int]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError("levels range must be start:stop:step")
        start, stop, step = (int(p) for p in parts)
        return list(range(start, stop + 1, step))
    return [int(p) for p in text.split(",") if p]


def _add_spec_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--events", type=int, default=17500, help="event count (fixed value when swept)")
    parser.add_argument("--object-types", type=int, default=4, dest="object_types")
    parser.add_argument("--attributes", type=int, default=4)
    parser.add_argument("--fan-out", type=int, default=3, dest="fan_out")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--activities", type=int, default=10)


def _spec_from_args(args) -> "SynthLogSpec":
    from occube.bench import SynthLogSpec

    return SynthLogSpec(
        n_events=args.events,
        n_object_types=args.object_types,
        n_attributes=args.attributes,
        fan_out=args.fan_out,
        seed=args.seed,
        n_activities=args.activities,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="occube", description="Object-centric process cube engine")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default=os.environ.get("OCCUBE_BIND", "127.0.0.1"))
    serve.add_argument("--ui", default=None, help="directory with the built explorer UI to serve at /")

    run = sub.add_parser("run", help="execute a recorded exploration script")
    run.add_argument("script", help="path to the script JSON")
    run.add_argument("--out-dir", default=".", help="directory for export outputs")

    gen = sub.add_parser("gen", help="generate a synthetic purchasing log")
    _add_spec_flags(gen)
    gen.add_argument("--out", required=True, help="output OCEL path")

    bench = sub.add_parser("bench", help="scalability experiments")
    bench_sub = bench.add_subparsers(dest="bench_command", required=True)

    sweep = bench_sub.add_parser("sweep", help="time cube create/load across one variable")
    sweep.add_argument("--variable", choices=("events", "object-types", "attributes"), required=True)
    sweep.add_argument("--levels", type=_parse_levels, required=True, help="start:stop:step or comma list")
    sweep.add_argument("--reps", type=int, default=5)
    sweep.add_argument("--out", default=None, help="CSV output path (default stdout)")
    sweep.add_argument("--engine", choices=("auto", "c", "py"), default="auto")
    sweep.add_argument("--workers", type=int, default=1, help="parallel materialization workers")
    _add_spec_flags(sweep)

    kernels = bench_sub.add_parser("kernels", help="compare the pure and compiled kernels")
    kernels.add_argument("--reps", type=int, default=5)
    _add_spec_flags(kernels)

    return parser


def _cmd_serve(args) -> int:
    import uvicorn

    if args.ui:
        os.environ["OCCUBE_UI_DIR"] = args.ui
    from occube.service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="info")
    return 0


def _cmd_run(args) -> int:
    from occube.scripting import load_script, run_script

    script_path = Path(args.script)
    script = load_script(script_path)
    written = run_script(script, script_path.parent, Path(args.out_dir))
    for path in written:
        print(path)
    return 0


def _cmd_gen(args) -> int:
    from occube.bench import generate_log
    from occube.io.ocel import export_ocel

    log = generate_log(_spec_from_args(args))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", encoding="utf-8") as fh:
        export_ocel(log, fh)
    print(f"{out}: {len(log)} events, {len(log.object_types)} object types, {len(log.attributes)} attributes")
    return 0


def _cmd_bench_sweep(args) -> int:
    from occube.bench import fit_power, fit_trend, run_sweep, write_csv

    engine = None if args.engine == "auto" else args.engine

    def report(result):
        print(
            f"{result.variable}={result.level}: create {result.create_s:.3f}s "
            f"load {result.load_s:.3f}s (stddev {result.stddev:.3f})",
            file=sys.stderr,
        )

    results = run_sweep(
        args.variable,
        args.levels,
        _spec_from_args(args),
        reps=args.reps,
        engine=engine,
        workers=args.workers,
        on_result=report,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_csv(results, fh)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        write_csv(results, sys.stdout)
    if len(results) >= 4:
        trend = fit_trend(results)
        power = fit_power(results)
        print(
            f"create trend: slope {trend.slope:.6g} intercept {trend.intercept:.6g} "
            f"R2 {trend.r_squared:.4f}; growth exponent {power.exponent:.3f}",
            file=sys.stderr,
        )
    return 0


def _cmd_bench_kernels(args) -> int:
    from occube.bench import compare_kernels

    out = compare_kernels(_spec_from_args(args), reps=args.reps)
    spec = out["spec"]
    print(f"log: {spec.n_events} events, {spec.n_object_types} object types, fan-out {spec.fan_out}")
    for engine in sorted(out["create"]):
        name = {"c": "compiled", "py": "pure"}[engine]
        print(f"{name:>9}: create {out['create'][engine]:.4f}s  kernel {out['kernel'][engine]:.4f}s")
    if "create_speedup" in out:
        print(f"speedup: create x{out['create_speedup']:.2f}, kernel x{out['kernel_speedup']:.2f}")
    else:
        print("compiled kernel not available; showing pure engine only")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "bench":
            if args.bench_command == "sweep":
                return _cmd_bench_sweep(args)
            return _cmd_bench_kernels(args)
        raise AssertionError(f"unhandled command {args.command}")
    except OccubeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
