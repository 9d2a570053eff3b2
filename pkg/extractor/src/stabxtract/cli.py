"""Command line entry: one subcommand, `extract --job <file>`."""

from __future__ import annotations

import argparse
import sys

from .errors import ExtractError, JobError
from .extract import extract_fragment_likelihoods, extract_likelihoods
from .jobs import load_job


class _Parser(argparse.ArgumentParser):
    # argument mistakes are job errors, exit code 1 like any invalid input
    def error(self, message):
        raise JobError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="stabxtract",
        description="Populate likelihood interchange files from scoring models.",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    extract = commands.add_parser(
        "extract",
        help="run one extraction job",
        description="Run the job file: fragment jobs write one unfolded-state "
        "window table, all others one whole-sequence table.",
    )
    extract.add_argument("--job", required=True, help="job JSON file")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        job = load_job(args.job)
        operation = extract_fragment_likelihoods if job.fragments else extract_likelihoods
        result = operation(job)
    except JobError as exc:
        print(f"job error: {exc}", file=sys.stderr)
        return 1
    except ExtractError as exc:
        print(f"extraction error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {result.n_rows} rows to {result.table}")
    if result.positions is not None:
        print(f"wrote per-position vectors to {result.positions}")
    print(f"wrote manifest to {result.manifest}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
