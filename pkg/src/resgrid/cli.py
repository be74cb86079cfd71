"""Command-line interface: run, validate, and oracle-check scenarios."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import SimulationError
from .scenario import load_scenario, oracle_check, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resgrid",
        description="Deterministic power-grid resilience simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate a scenario and write result files")
    run.add_argument("scenario", help="path to a scenario YAML file")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    run.add_argument("--out-dir", default="out", help="output directory")
    run.add_argument("--format", choices=("csv", "json"), default="csv")

    val = sub.add_parser("validate", help="parse and validate a scenario file")
    val.add_argument("scenario")

    orc = sub.add_parser("oracle-check",
                         help="compare every market solve against the LP oracle")
    orc.add_argument("scenario")
    orc.add_argument("--seed", type=int, default=None)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        if getattr(args, "seed", None) is not None:
            from dataclasses import replace
            scenario = replace(scenario, seed=args.seed)

        if args.command == "validate":
            print(json.dumps({
                "scenario": scenario.name,
                "regions": len(scenario.topology.regions),
                "demand_agents": len(scenario.demand_agents),
                "storage_agents": len(scenario.storage_agents),
                "horizon": scenario.horizon,
                "mode": scenario.mode,
                "valid": True,
            }, sort_keys=True))
            return 0

        if args.command == "oracle-check":
            report = oracle_check(scenario)
            print(json.dumps(report, sort_keys=True, indent=2))
            return 0

        result = run_scenario(scenario)
        written = result.write_outputs(Path(args.out_dir), fmt=args.format)
        summary = result.report_dict()
        summary["files"] = [str(p) for p in written]
        print(json.dumps(summary, sort_keys=True, indent=2))
        return 0
    except SimulationError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
