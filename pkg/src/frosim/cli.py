"""Command-line front end.

Subcommands: ``simulate`` (run one injection, write the trace CSV),
``synthesize`` (search the minimal successful injection, write result JSON),
``sweep`` (run a parameter study, write the records CSV), and ``report``
(aggregate a records CSV into trend outputs).

Exit codes are a stable contract: 0 success, 1 no attack exists, 2 bad
configuration or spec, 3 output I/O failure, 4 search backend declined
(non-monotone feasibility without ``--exhaustive``).

The environment variable FRO_LOG_LEVEL (error|warn|info|debug) controls
logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import load_config, config_from_dict
from .dynamics import AttackSignal, SimOptions, simulate, write_trace_csv
from .errors import FrosimError, NonMonotoneFeasibility
from .sweep import (
    SweepMode,
    SweepSpec,
    run_sweep,
    read_records_csv,
    trend_report,
    write_records_csv,
    write_trend_outputs,
)
from .synth import (
    AttackGoal,
    Sign,
    TargetKind,
    exhaustive_min_attack,
    synthesis_result_dict,
    synthesize_min_attack,
)

log = logging.getLogger("frosim")

EXIT_OK = 0
EXIT_NO_ATTACK = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_BACKEND = 4

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def parse_quantity(text: str, f_nominal: float) -> float:
    """Parse a numeric flag; an ``hz`` suffix converts to per-unit."""
    t = text.strip().lower()
    if t.endswith("hz"):
        return float(t[:-2]) / f_nominal
    if t.endswith("pu"):
        return float(t[:-2])
    return float(t)


def _sim_options(args) -> SimOptions:
    return SimOptions(
        literal_accumulation=args.literal_accumulation,
        literal_signs=args.literal_signs,
        rescale_inertia=args.rescale_inertia,
    )


def _goal_from_args(args) -> AttackGoal:
    return AttackGoal(
        horizon=args.horizon,
        target_kind=TargetKind(args.target),
        sign=Sign(args.sign),
        specific_relay_id=args.relay_id,
        attack_step=args.attack_step,
    )


def cmd_simulate(args) -> int:
    try:
        config = load_config(args.config)
        dp_a = parse_quantity(args.dp_a, config.params.f_nominal)
        attack = AttackSignal(dp_a, args.attack_step)
        trace = simulate(config, attack, args.horizon, _sim_options(args))
    except (FrosimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        write_trace_csv(trace, args.out)
    except OSError as exc:
        print(f"error writing {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("trace written to %s (%d rows, %d events)",
             args.out, len(trace), len(trace.events))
    return EXIT_OK


def cmd_synthesize(args) -> int:
    try:
        config = load_config(args.config)
        goal = _goal_from_args(args)
        tolerance = parse_quantity(args.tolerance, config.params.f_nominal)
    except (FrosimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.exhaustive:
            outcome = exhaustive_min_attack(config, goal, tolerance)
        else:
            outcome = synthesize_min_attack(
                config, goal, tolerance, probe_samples=args.probe_samples,
            )
    except NonMonotoneFeasibility as exc:
        print(f"error: {exc}; rerun with --exhaustive", file=sys.stderr)
        return EXIT_BACKEND
    except FrosimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    trace_file = None
    try:
        if outcome.success:
            trace_file = args.trace_out or str(args.out) + ".trace.csv"
            write_trace_csv(outcome.vector.trace, trace_file)
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(synthesis_result_dict(outcome, trace_file), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"error writing results: {exc}", file=sys.stderr)
        return EXIT_IO

    if not outcome.success:
        print("no attack exists within the capability bound")
        return EXIT_NO_ATTACK
    v = outcome.vector
    print(f"success: dp_a={v.dp_a:.6g} pu trips {v.outcome.relay_id} "
          f"({v.outcome.kind.json_name}) at step {v.outcome.trip_step}")
    return EXIT_OK


def _spec_from_file(path, seed_override=None) -> SweepSpec:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if "base_config_file" in data:
        base = load_config(Path(path).parent / data["base_config_file"])
    else:
        base = config_from_dict(data["base_config"])
    g = data["goal"]
    goal = AttackGoal(
        horizon=g["horizon"],
        target_kind=TargetKind(g.get("target", "any")),
        sign=Sign(g.get("sign", "positive")),
        specific_relay_id=g.get("relay_id"),
        attack_step=g.get("attack_step", 0),
    )
    kwargs = {}
    for json_key, field_name in [
        ("h_s", "h_values"), ("r_pu", "r_values"), ("t_s", "t_values"),
        ("toi_pct", "toi_pct_values"), ("ad_pct", "ad_pct_values"),
    ]:
        if json_key in data:
            kwargs[field_name] = tuple(data[json_key])
    seed = seed_override if seed_override is not None else data.get("seed", 0)
    return SweepSpec(
        base=base,
        goal=goal,
        mode=SweepMode(data.get("mode", "cartesian")),
        count=data.get("count"),
        seed=seed,
        tolerance=data.get("tolerance", 1e-4),
        **kwargs,
    )


def cmd_sweep(args) -> int:
    try:
        spec = _spec_from_file(args.spec, args.seed)
    except (FrosimError, OSError, ValueError, KeyError) as exc:
        print(f"error: bad sweep spec: {exc!r}", file=sys.stderr)
        return EXIT_CONFIG
    records = run_sweep(spec, workers=args.workers)
    try:
        write_records_csv(records, args.out)
        with open(str(args.out) + ".meta.json", "w", encoding="utf-8") as fh:
            json.dump({
                "mode": spec.mode.value,
                "count": len(records),
                "seed": spec.seed,
                "tolerance": spec.tolerance,
            }, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"error writing {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    successes = sum(1 for r in records if r.success)
    by_type: dict[str, int] = {}
    for r in records:
        by_type[r.attack_type.value] = by_type.get(r.attack_type.value, 0) + 1
    print(f"{len(records)} combinations, {successes} successful "
          f"({by_type.get('ROCOF', 0)} ROCOF, {by_type.get('LS', 0)} LS); "
          f"mode={spec.mode.value} seed={spec.seed}")
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        records = read_records_csv(args.records)
        report = trend_report(records)
    except (FrosimError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    csv_dir = args.csv_dir or Path(args.out).parent
    try:
        write_trend_outputs(report, args.out, csv_dir)
    except OSError as exc:
        print(f"error writing report: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"{report.total_records} records, {report.total_successes} successes")
    for name, trend in report.parameters.items():
        marker = "ok" if trend.matches_expected else "MISMATCH"
        print(f"  {name}: verdict={trend.verdict} expected={trend.expected} "
              f"[{marker}]")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frosim",
        description="Grid frequency-dynamics simulation and false-relay-"
                    "operation attack studies",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one injection and write the trace CSV")
    p.add_argument("--config", required=True, help="grid config JSON")
    p.add_argument("--dp-a", required=True,
                   help="injection magnitude, per-unit (suffix 'hz' divides "
                        "by nominal frequency)")
    p.add_argument("--attack-step", type=int, default=0)
    p.add_argument("--horizon", type=int, required=True, help="steps to simulate")
    p.add_argument("--out", required=True, help="trace CSV path")
    p.add_argument("--literal-accumulation", action="store_true",
                   help="relays re-add their block every qualifying step")
    p.add_argument("--literal-signs", action="store_true",
                   help="apply shed load with the frequency-lowering sign")
    p.add_argument("--rescale-inertia", action="store_true",
                   help="scale H by surviving generation share after trips")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synthesize", help="find the minimal successful injection")
    p.add_argument("--config", required=True)
    p.add_argument("--target", choices=[k.value for k in TargetKind], default="any")
    p.add_argument("--relay-id", default=None,
                   help="relay id for --target specific")
    p.add_argument("--sign", choices=[s.value for s in Sign], default="positive")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--attack-step", type=int, default=0)
    p.add_argument("--tolerance", default="1e-4",
                   help="magnitude tolerance, per-unit")
    p.add_argument("--probe-samples", type=int, default=17)
    p.add_argument("--exhaustive", action="store_true",
                   help="scan every magnitude at the tolerance resolution "
                        "instead of probe+bisection")
    p.add_argument("--out", required=True, help="result JSON path")
    p.add_argument("--trace-out", default=None,
                   help="winning trace CSV path (default: OUT.trace.csv)")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("sweep", help="run a parameter study")
    p.add_argument("--spec", required=True, help="sweep spec JSON")
    p.add_argument("--out", required=True, help="records CSV path")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--seed", type=int, default=None,
                   help="override the spec's RANDOM seed")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("report", help="aggregate sweep records into trends")
    p.add_argument("--records", required=True, help="sweep records CSV")
    p.add_argument("--out", required=True, help="trend report JSON path")
    p.add_argument("--csv-dir", default=None,
                   help="directory for per-parameter CSVs (default: next to OUT)")
    p.set_defaults(func=cmd_report)
    return parser


def run(argv=None) -> int:
    level = _LOG_LEVELS.get(os.environ.get("FRO_LOG_LEVEL", "warn").lower(),
                            logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
