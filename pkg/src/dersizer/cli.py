"""Command line entry points: run a study, reduce a profile, validate a config.

Exit codes: 0 ok, 1 solve failure, 2 audit violation, 3 config or I/O
error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .data_model import LoadSplitSpec, parse_profile_csv, validate_scenario_set
from .errors import ConfigError, DersizerError, IngestionError, ValidationError
from .reduction import ReductionConfig, reduce_scenarios, write_reduction_csv
from .study import StudyConfig, run_study

EXIT_OK = 0
EXIT_SOLVE = 1
EXIT_AUDIT = 2
EXIT_CONFIG = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dersizer",
        description="Size PV, storage and converters for a hybrid AC/DC "
                    "microgrid by solving the scenario-based sizing MILP.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the four-case sizing study")
    run.add_argument("--config", required=True, help="JSON study config")
    run.add_argument("--cases", help="comma-separated case numbers, e.g. 0,3")
    run.add_argument("--gap", type=float, help="relative MIP gap override")
    run.add_argument("--backend", choices=("reference", "external", "oracle"),
                     help="solver backend override")
    run.add_argument("--audit", action="store_true",
                     help="print each case's audit transcript to stdout")
    run.add_argument("--out", help="output directory override")

    reduce_p = sub.add_parser("reduce", help="pick representative days from a profile")
    reduce_p.add_argument("--profile", required=True, help="hourly profile CSV")
    reduce_p.add_argument("--k", type=int, default=6, help="number of days")
    reduce_p.add_argument("--feature", choices=("load", "load+pv"), default="load")
    reduce_p.add_argument("--out", help="write day_index,probability CSV here")

    validate = sub.add_parser("validate", help="check a study config end to end")
    validate.add_argument("--config", required=True, help="JSON study config")
    return parser


def _cmd_run(args) -> int:
    config = StudyConfig.from_file(args.config)
    if args.cases:
        try:
            cases = tuple(int(c) for c in args.cases.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad --cases value {args.cases!r}") from exc
        config = replace(config, cases=cases)
    solve = config.solve
    if args.gap is not None:
        solve = replace(solve, relative_gap=args.gap)
    if args.backend:
        solve = replace(solve, backend=args.backend)
    config = replace(config, solve=solve)
    if args.out:
        config = replace(config, output_dir=Path(args.out))

    print("dersizer study (demand charges on a monthly billing convention)")
    outcome = run_study(config)
    for case in sorted(outcome.cases):
        result = outcome.cases[case]
        if not result.solved:
            print(f"case {case}: FAILED ({result.error})")
            continue
        sol = result.solution
        print(f"case {case}: {sol.status} objective={sol.objective:.2f} "
              f"pv={sol.capacities['pv']:.1f} es={sol.capacities['es']:.1f} "
              f"audit={'ok' if result.audit.ok else 'VIOLATIONS'}")
        if args.audit:
            print(result.audit.to_text())
    print(f"outputs in {outcome.output_dir}")
    return outcome.exit_code


def _cmd_reduce(args) -> int:
    profile = parse_profile_csv(args.profile)
    cfg = ReductionConfig(k=args.k, feature=args.feature)
    scenario_set = reduce_scenarios(profile, cfg, LoadSplitSpec())
    for day in scenario_set.days:
        print(f"{day.id}: probability {day.probability:.6f}")
    if args.out:
        write_reduction_csv(scenario_set, args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    config = StudyConfig.from_file(args.config)
    profile = parse_profile_csv(config.profile)
    scenario_set = reduce_scenarios(profile, config.reduction, config.split)
    report = validate_scenario_set(scenario_set)
    if not report.ok:
        print(f"scenario set invalid:\n{report}")
        return EXIT_CONFIG
    print(f"config ok: {profile.whole_days} days, k={config.reduction.k}, "
          f"cases {list(config.cases)}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "reduce": _cmd_reduce, "validate": _cmd_validate}
    try:
        return handlers[args.command](args)
    except (ConfigError, IngestionError, ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DersizerError as exc:
        print(f"solve error: {exc}", file=sys.stderr)
        return EXIT_SOLVE


if __name__ == "__main__":
    raise SystemExit(main())
