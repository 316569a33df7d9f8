"""Command-line interface.

    teleadjust simulate --config run.json [--out DIR]
    teleadjust analyze --dataset dataset.csv [--json report.json]
    teleadjust trace --log trials.csv --participant 0 --block 0 --staircase back:upper
    teleadjust correct --origin 0,0 --selected 2.8,0 --partner 3,0 --zone personal
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import logs
from .config import ConfigError, load_config
from .geometry import Direction, GeometryError, Position2, ProxemicZone, proxemic_correction
from .report import build_report, format_report, format_trace, staircase_trace
from .session import dataset_from_results, run_participants
from .staircase import StaircaseId

SMALL_BACKWARD_THRESHOLD = 1.33
LARGE_BACKWARD_THRESHOLD = 1.64
SMALL_RANGE_CUTOFF = 5.0


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out or cfg.output_dir
    if not out_dir:
        raise ConfigError("output_dir", "no output directory given (use --out)")
    out = logs.ensure_dir(out_dir)

    results = run_participants(cfg.n_participants, cfg.population, cfg.seed, cfg.block_configs)
    dataset = dataset_from_results(results)
    logs.write_trial_log(out / "trials.csv",
                         (t for res in results for block in res.blocks for t in block.trials))
    logs.write_dataset(out / "dataset.csv", dataset)

    report = build_report(dataset)
    capped = sum(not b.converged for res in results for b in res.blocks)
    summary = {
        "seed": cfg.seed,
        "n_participants": cfg.n_participants,
        "n_included": report["n_included"],
        "n_catch_excluded": sum(r.catch_excluded for r in dataset.rows),
        "n_capped_blocks": capped,
        "config": cfg.raw,
        "report": report,
    }
    (out / "summary.json").write_text(_dump_json(summary))
    (out / "report.txt").write_text(format_report(report))
    print(f"wrote {out / 'trials.csv'}, {out / 'dataset.csv'}, {out / 'summary.json'}")
    return 0


def cmd_analyze(args) -> int:
    dataset = logs.read_dataset(args.dataset)
    report = build_report(dataset)
    if args.json:
        Path(args.json).write_text(_dump_json(report))
    sys.stdout.write(format_report(report))
    return 0


def _staircase_spec(text: str) -> tuple[Direction, StaircaseId]:
    names = {"fwd": Direction.FORWARD, "forward": Direction.FORWARD,
             "back": Direction.BACKWARD, "backward": Direction.BACKWARD}
    d, _, s = text.partition(":")
    try:
        return names[d], StaircaseId(s)
    except (KeyError, ValueError):
        raise argparse.ArgumentTypeError(
            f"bad staircase {text!r}; expected <fwd|back>:<upper|lower>") from None


def cmd_trace(args) -> int:
    direction, sid = args.staircase
    records = logs.read_trial_log(args.log)
    series, estimate = staircase_trace(records, args.participant, args.block, direction, sid)
    sys.stdout.write(format_trace(series, estimate))
    return 0


def _point(text: str) -> Position2:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y coordinates, got {text!r}") from None
    return Position2(x, y)


def _zone(text: str) -> ProxemicZone:
    try:
        return ProxemicZone.from_name(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def cmd_correct(args) -> int:
    if args.threshold is not None:
        threshold = args.threshold
    elif args.origin.dist(args.selected) <= args.range_cutoff:
        threshold = args.small_threshold
    else:
        threshold = args.large_threshold
    c = proxemic_correction(args.origin, args.selected, args.partner, threshold, args.zone)
    print(f"adjusted: {logs.fmt(c.position.x)},{logs.fmt(c.position.y)}")
    print(f"magnitude: {logs.fmt(c.magnitude)}")
    print(f"attained: {'true' if c.attained else 'false'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teleadjust",
                                     description="Adjusted-teleport threshold simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a seeded Monte-Carlo experiment")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory (overrides output_dir in the config)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="statistics report for a dataset CSV")
    p.add_argument("--dataset", required=True)
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("trace", help="stimulus series of one staircase")
    p.add_argument("--log", required=True)
    p.add_argument("--participant", type=int, required=True)
    p.add_argument("--block", type=int, required=True)
    p.add_argument("--staircase", type=_staircase_spec, required=True,
                   help="<fwd|back>:<upper|lower>")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("correct", help="pull a teleport back out of a partner's space")
    p.add_argument("--origin", type=_point, required=True)
    p.add_argument("--selected", type=_point, required=True)
    p.add_argument("--partner", type=_point, required=True)
    p.add_argument("--zone", type=_zone, required=True, help="intimate, personal or social")
    p.add_argument("--threshold", type=float, help="backward budget for any teleport length")
    p.add_argument("--small-threshold", type=float, default=SMALL_BACKWARD_THRESHOLD)
    p.add_argument("--large-threshold", type=float, default=LARGE_BACKWARD_THRESHOLD)
    p.add_argument("--range-cutoff", type=float, default=SMALL_RANGE_CUTOFF,
                   help="teleports up to this length use the small-range threshold")
    p.set_defaults(func=cmd_correct)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (logs.ParseError, LookupError, GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
