"""Command-line interface: ``normopt {simulate,optimize,indicators,reason,report}``.

Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from normopt import experiment as ex
from normopt import reasoner
from normopt.errors import ConfigurationError, ConstraintError, ContractError
from normopt.society import NormVector

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= ex.MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def _algorithms(text: str) -> tuple[str, ...]:
    return tuple(a.strip() for a in text.split(",") if a.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="normopt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one society path and dump its state")
    p.add_argument("--norms", required=True, help="JSON file with collect, redistribute, catch, fine")
    p.add_argument("--config", help="experiment config JSON (its simulation block is used)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default="simulation")

    p = sub.add_parser("optimize", help="run a batch of optimizations")
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--seed", type=_seed, help="master seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--algorithms", type=_algorithms, help="comma-separated algorithm ids")
    p.add_argument("--runs", type=int)
    p.add_argument("--problem", choices=sorted(ex.PROBLEMS))
    p.add_argument("--generations", type=int)
    p.add_argument("--population-size", type=int)
    p.add_argument("--eval-samples", type=int, help="paths per fitness evaluation during search")
    p.add_argument("--final-samples", type=int, help="paths per genome when re-scoring the final front")
    p.add_argument("--jobs", type=int, help="worker processes (default: available CPUs)")

    p = sub.add_parser("indicators", help="hypervolume, IGD+ and Kruskal-Wallis comparison")
    p.add_argument("run_dir", help="output directory of optimize (or one problem directory in it)")

    p = sub.add_parser("reason", help="elect one solution of a front by voting")
    p.add_argument("front", help="front CSV (e.g. pf_known.csv)")
    p.add_argument("--config", help="experiment config JSON (voters, vote_mode, direction_aware)")
    p.add_argument("--voters", type=int)
    p.add_argument("--seed", type=_seed, default=0, help="voter seed")
    p.add_argument("--mode", choices=reasoner.MODES)
    p.add_argument("--direction-aware", action="store_true", default=None, help="score collect as 1 - collect")
    p.add_argument("--out", help="directory for election.json")

    p = sub.add_parser("report", help="plot-data CSVs and a markdown summary")
    p.add_argument("run_dir")
    return parser


def _config(args) -> ex.ExperimentConfig:
    return ex.ExperimentConfig.load(args.config) if getattr(args, "config", None) else ex.ExperimentConfig()


def cmd_simulate(args) -> int:
    config = _config(args)
    path = Path(args.norms)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConstraintError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConstraintError(f"{path}: norms must be a JSON object")
    norms = NormVector.from_dict(data)
    try:
        norms.validate()
    except ConstraintError as exc:
        raise ConstraintError(f"{path}: {exc}") from None
    dump = ex.simulate(config.simulation, norms, args.seed, args.out)
    totals = dump["total_wealth"]
    print(f"wrote {args.out}/society.json and objectives.csv (total wealth {totals[0]:.4f} -> {totals[-1]:.4f})")
    return EXIT_OK


def cmd_optimize(args) -> int:
    config = _config(args)
    overrides = {
        "master_seed": args.seed,
        "out": args.out,
        "algorithms": args.algorithms,
        "runs": args.runs,
        "problem": args.problem,
    }
    config = replace(config, **{k: v for k, v in overrides.items() if v is not None})
    moea = {
        "generations": args.generations,
        "population_size": args.population_size,
        "eval_samples": args.eval_samples,
        "final_samples": args.final_samples,
    }
    config = replace(config, moea=replace(config.moea, **{k: v for k, v in moea.items() if v is not None}))
    config = ex.ExperimentConfig.from_dict(config.to_dict())
    result = ex.optimize(config, jobs=args.jobs)
    done = len(result.records) - len(result.failures)
    print(f"{done}/{len(result.records)} runs completed in {result.directory}")
    if result.failures:
        for r in result.failures:
            print(f"failed: {r['algorithm']} run {r['run']}: {r['error']}", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_indicators(args) -> int:
    directories = ex.problem_dirs(args.run_dir)
    if not directories:
        raise FileNotFoundError(f"{args.run_dir}: no optimization runs found")
    for directory in directories:
        result = ex.compute_indicators(directory)
        print(f"## {directory}\n")
        print(result.table.to_markdown())
        for path in result.missing:
            print(f"missing front: {path}", file=sys.stderr)
    return EXIT_OK


def cmd_reason(args) -> int:
    config = _config(args)
    election = ex.reason(
        args.front,
        voters=args.voters if args.voters is not None else config.voters,
        seed=args.seed,
        mode=args.mode or config.vote_mode,
        direction_aware=config.direction_aware if args.direction_aware is None else args.direction_aware,
        out=args.out,
    )
    print(election.to_markdown(), end="")
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.run_dir)
    if not path.is_dir():
        raise FileNotFoundError(f"{path}: no such directory")
    written = ex.build_report(path)
    if not written:
        print(f"{path}: no optimization runs found; nothing to report")
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "indicators": cmd_indicators,
    "reason": cmd_reason,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigurationError, ConstraintError, ContractError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        where = f"{exc.filename}: " if getattr(exc, "filename", None) else ""
        print(f"error: {where}{exc.strerror or exc}", file=sys.stderr)
        return EXIT_FAILED
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
