"""Command-line interface.

Exit codes: 0 control wins, 10 test wins (``evaluate`` only); 0 success for
other commands.  Errors: 2 usage, 3 parse error, 4 duplicate day,
5 non-positive response, 6 degenerate regression, 7 horizon too short,
8 group selection, 9 file not found / unreadable, 11 invalid scenario,
12 any other library error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .bootstrap import BootstrapConfig, Decision
from .errors import (
    DegenerateDesign,
    DuplicateDay,
    HorizonTooShort,
    InvalidSeries,
    LtvBootError,
    NonPositiveResponse,
    ParseError,
    ScenarioError,
)
from .io import load_daily_csv, write_daily_csv, write_plot_csv
from .model import ExtrapolationConfig
from .report import evaluate, run_retrospective
from .simulator import crossover_scenario, load_scenario, null_scenario, simulate

log = logging.getLogger("ltvboot")

EXIT_CONTROL = 0
EXIT_TEST = 10
EXIT_USAGE = 2
# Checked in order, so subclasses come before their bases.
EXIT_CODES = [
    (DuplicateDay, 4),
    (ParseError, 3),
    (NonPositiveResponse, 5),
    (DegenerateDesign, 6),
    (HorizonTooShort, 7),
    (InvalidSeries, 8),
    (ScenarioError, 11),
    (LtvBootError, 12),
]
EXIT_IO = 9

PRESETS = {"crossover": crossover_scenario, "null": null_scenario}


class GroupSelectionError(InvalidSeries):
    pass


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, OSError):
        return EXIT_IO
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    raise exc


def _write_json(doc, path):
    text = json.dumps(doc, indent=2) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _select_groups(series, control, test):
    by_label = {s.group_label: s for s in series}
    if len(by_label) > 2:
        raise GroupSelectionError(
            f"expected two groups, found {len(by_label)}: {sorted(by_label)}"
        )
    missing = [g for g in (control, test) if g not in by_label]
    if missing:
        raise GroupSelectionError(f"group(s) {missing} not in input; have {sorted(by_label)}")
    return by_label[control], by_label[test]


def cmd_evaluate(args) -> int:
    series = load_daily_csv(args.input, log_offset=args.log_offset)
    control, test = _select_groups(series, args.control, args.test)
    config = BootstrapConfig(
        iterations=args.iterations,
        seed=args.seed,
        horizon=ExtrapolationConfig(args.horizon, not args.observed_from_model),
    )
    report = evaluate(control, test, config, args.alpha, args.workers, args.log_offset)
    _write_json(report.to_dict(), args.output)
    if args.plot_data:
        write_plot_csv(report.bands(), {s.group_label: s for s in (control, test)}, args.plot_data)
    log.info(
        "decision=%s p(test>control)=%.4f",
        report.decision.value,
        report.p_test_minus_control_positive,
    )
    return EXIT_TEST if report.decision is Decision.TEST else EXIT_CONTROL


def _scenario_from_args(args):
    if args.scenario:
        scenario = load_scenario(args.scenario)
    else:
        kwargs = {} if args.n_users is None else {"n_users": args.n_users}
        scenario = PRESETS[args.preset](**kwargs)
    return scenario


def cmd_retrospective(args) -> int:
    scenario = _scenario_from_args(args)
    summary = run_retrospective(
        scenario,
        args.experiments,
        args.seed,
        iterations=args.iterations,
        horizon=args.horizon,
        alpha=args.alpha,
        workers=args.workers,
    )
    doc = summary.to_dict()
    doc["config"] = {
        "scenario": scenario.to_dict(),
        "master_seed": args.seed,
        "iterations": args.iterations,
        "horizon": args.horizon,
        "alpha": args.alpha,
    }
    _write_json(doc, args.output)
    if args.table:
        with open(args.table, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["method", "success", "failure", "accuracy"])
            for name, score in (("standard", summary.standard), ("proposed", summary.proposed)):
                w.writerow([name, score.success, score.failure, repr(score.accuracy)])
    if args.details:
        with open(args.details, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(
                [
                    "experiment",
                    "seed",
                    "true_winner",
                    "proposed_decision",
                    "proposed_p_test_better",
                    "standard_decision",
                    "welch_t",
                    "welch_p",
                ]
            )
            for r in summary.records:
                w.writerow(
                    [
                        r.index,
                        r.seed,
                        r.true_winner,
                        r.proposed_decision,
                        repr(r.proposed_p_test_better),
                        r.standard_decision,
                        repr(r.welch_t),
                        repr(r.welch_p),
                    ]
                )
    return 0


def cmd_simulate(args) -> int:
    scenario = _scenario_from_args(args)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    experiment = simulate(scenario)
    through = args.through_day or scenario.evaluation_day
    series = [experiment.daily[g].truncate(through) for g in ("control", "test")]
    write_daily_csv(series, args.output)
    return 0


def cmd_preset(args) -> int:
    scenario = PRESETS[args.preset]()
    _write_json(scenario.to_dict(), args.output)
    return 0


def _add_scenario_source(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="scenario JSON file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--n-users", type=int, help="override preset cohort size per group")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltvboot",
        description="Early lifetime-value decisions for A/B tests via residual bootstrap.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", help="compare two groups from a daily CSV")
    p.add_argument("input", help="CSV with header group,day,avg_revenue[,weekday]")
    p.add_argument("--control", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--horizon", type=int, default=365)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output", default="-", help="report JSON path (default stdout)")
    p.add_argument("--plot-data", help="write per-day extrapolation bands as CSV")
    p.add_argument(
        "--log-offset",
        type=float,
        default=None,
        help="add this constant to every response before taking logs (admits zero days)",
    )
    p.add_argument(
        "--observed-from-model",
        action="store_true",
        help="observed days contribute model predictions instead of pseudo-data",
    )
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("retrospective", help="accuracy of both methods on simulated experiments")
    _add_scenario_source(p)
    p.add_argument("--experiments", type=int, required=True)
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--horizon", type=int, default=365)
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--output", default="-", help="summary JSON path (default stdout)")
    p.add_argument("--table", help="write the method/success/failure/accuracy table as CSV")
    p.add_argument("--details", help="write one CSV row per simulated experiment")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_retrospective)

    p = sub.add_parser("simulate", help="write a simulated experiment as a daily CSV")
    _add_scenario_source(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--through-day", type=int, help="last day written (default evaluation_day)")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("preset", help="print a preset scenario as JSON")
    p.add_argument("preset", choices=sorted(PRESETS))
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (LtvBootError, OSError) as exc:
        print(f"ltvboot: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
