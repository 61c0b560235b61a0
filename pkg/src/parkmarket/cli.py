"""Command line: validate a scenario file, or run it and write the artifacts."""

from __future__ import annotations

import argparse
import json
import sys

from .scenario import StepFailure, parse_scenario, run_scenario, validate_scenario

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_EXECUTION = 2


def _load_json(path: str):
    with open(path, encoding="utf-8") as handle:
        return json.load(handle)


def _read_and_validate(path: str) -> tuple[dict | None, list[str]]:
    try:
        data = _load_json(path)
    except OSError as exc:
        return None, [f"cannot read scenario: {exc}"]
    except json.JSONDecodeError as exc:
        return None, [f"scenario is not valid JSON: {exc}"]
    return data, validate_scenario(data)


def _cmd_validate(args) -> int:
    _, problems = _read_and_validate(args.scenario)
    for problem in problems:
        print(problem, file=sys.stderr)
    if problems:
        return EXIT_VALIDATION
    print(f"{args.scenario}: ok")
    return EXIT_OK


def _cmd_run(args) -> int:
    data, problems = _read_and_validate(args.scenario)
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return EXIT_VALIDATION
    scenario = parse_scenario(data)
    try:
        result = run_scenario(scenario)
    except StepFailure as exc:
        print(exc, file=sys.stderr)
        return EXIT_EXECUTION
    with open(args.out, "w", encoding="utf-8") as handle:
        for event in result.events:
            handle.write(event.to_json() + "\n")
    with open(args.offchain, "w", encoding="utf-8") as handle:
        for record in result.offchain:
            handle.write(json.dumps(record, separators=(",", ":")) + "\n")
    with open(args.report, "w", encoding="utf-8") as handle:
        handle.write(json.dumps(result.report, indent=2, sort_keys=True) + "\n")
    print(
        f"{len(result.scenario.steps)} steps, {len(result.events)} events, "
        f"{len(result.offchain)} off-chain records -> {args.out}, {args.offchain}, {args.report}"
    )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="parkmarket",
        description="Deterministic parking-marketplace scenario simulator",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="execute a scenario and write artifacts")
    run_parser.add_argument("scenario", help="scenario JSON file")
    run_parser.add_argument("--out", default="events.jsonl", help="ledger event log (JSONL)")
    run_parser.add_argument("--offchain", default="offchain.jsonl", help="voucher trace (JSONL)")
    run_parser.add_argument("--report", default="report.json", help="funds-flow report (JSON)")
    run_parser.set_defaults(func=_cmd_run)

    validate_parser = commands.add_parser("validate", help="check a scenario file")
    validate_parser.add_argument("scenario", help="scenario JSON file")
    validate_parser.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
