"""Command-line entry point.

Four subcommands cover the pipeline: ``score`` turns tables plus a dataset
into per-variant scores, ``evaluate`` turns scores (or a config that can
compute them) into correlation reports, ``oracle`` runs a lattice scenario
with its verification checks, and ``report`` merges evaluation reports
into one comparison table.

Exit codes: 0 success, 1 configuration or validation error, 2 data error,
3 oracle verification failure. All randomness flows from the top-level
``--seed`` flag, which overrides any seed stored in config files.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, OracleCheckError, StabkitError
from .evaluate import (
    EvaluationReport,
    RunConfig,
    compute_strategy_runs,
    load_scores_csv,
    matrix_from_scores,
    merge_reports,
    run_strategy_matrix,
    write_scores_csv,
)
from .scenario import OracleScenario, require_passed, run_scenario


class _Parser(argparse.ArgumentParser):
    """Argument errors are configuration errors (exit 1, not argparse's 2)."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="stabkit", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="override every configured random seed for this invocation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score", help="compute per-variant scores from a run config")
    score.add_argument("--config", required=True, help="run config JSON")
    score.add_argument("--out", default="scores.csv", help="output scores CSV")
    score.set_defaults(func=_cmd_score)

    evaluate = sub.add_parser("evaluate", help="correlate scores against a dataset")
    evaluate.add_argument("--config", required=True, help="run config JSON")
    evaluate.add_argument(
        "--scores",
        default=None,
        help="precomputed scores CSV; omitted scores are computed from the config",
    )
    evaluate.add_argument("--out-dir", default=".", help="directory for report files")
    evaluate.add_argument("--prefix", default="evaluation", help="report file name prefix")
    evaluate.set_defaults(func=_cmd_evaluate)

    oracle = sub.add_parser("oracle", help="run a lattice oracle scenario and verify it")
    oracle.add_argument("--scenario", required=True, help="scenario JSON")
    oracle.add_argument("--out-dir", default=".", help="directory for emitted files")
    oracle.set_defaults(func=_cmd_oracle)

    report = sub.add_parser("report", help="merge evaluation reports into one table")
    report.add_argument("reports", nargs="+", help="evaluation report JSON files")
    report.add_argument("--out", default=None, help="merged CSV path (default: stdout)")
    report.set_defaults(func=_cmd_report)

    return parser


def _cmd_score(args: argparse.Namespace) -> int:
    config = RunConfig.from_json(args.config, seed_override=args.seed)
    runs, skipped, _ = compute_strategy_runs(config)
    for entry in skipped:
        print(f"skipped {entry.strategy}: {entry.reason}", file=sys.stderr)
    if not runs:
        raise ConfigError("no strategy could be scored; every configured strategy was skipped")
    out = write_scores_csv(runs, args.out)
    n = sum(len(run.scores) for run in runs.values())
    print(f"wrote {n} scores for {len(runs)} strategies to {out}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    config = RunConfig.from_json(args.config, seed_override=args.seed)
    if args.scores is not None:
        report = matrix_from_scores(config, load_scores_csv(args.scores))
    else:
        report = run_strategy_matrix(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = report.write_json(out_dir / f"{args.prefix}_report.json")
    csv_path = report.write_csv(out_dir / f"{args.prefix}_report.csv")
    long_path = report.write_long_csv(out_dir / f"{args.prefix}_report_long.csv")
    for row in report.rows:
        print(
            f"{row.strategy:28s} {row.scope:20s} {row.censored_policy:8s} "
            f"n={row.n_variants:<5d} pearson={row.pearson:+.4f} "
            f"spearman={row.spearman:+.4f} sem={row.sem:.4f}"
        )
    for entry in report.skipped:
        print(
            f"{entry.strategy:28s} {entry.scope:20s} {entry.censored_policy:8s} "
            f"skipped: {entry.reason}",
            file=sys.stderr,
        )
    print(f"wrote {json_path}, {csv_path}, {long_path}")
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    scenario = OracleScenario.from_json(args.scenario, seed_override=args.seed)
    outcome = run_scenario(scenario, args.out_dir)
    for check in outcome.checks:
        status = "ok  " if check.passed else "FAIL"
        print(f"[{status}] {check.name:24s} worst {check.worst:.3e} (tol {check.tolerance:.1e})")
    print(f"emitted {len(outcome.emitted)} files to {args.out_dir}; report {outcome.report_path}")
    require_passed(outcome)
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    reports: dict[str, EvaluationReport] = {}
    for text in args.reports:
        path = Path(text)
        label = path.stem
        if label in reports:
            raise ConfigError(f"duplicate report label {label!r}; rename one of the input files")
        reports[label] = EvaluationReport.load(path)
    merged = merge_reports(reports)
    if args.out is None:
        sys.stdout.write(merged)
    else:
        Path(args.out).write_text(merged)
        print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except OracleCheckError as exc:
        print(f"oracle verification failed: {exc}", file=sys.stderr)
        return 3
    except StabkitError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
