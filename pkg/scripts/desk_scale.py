"""Full pipeline at desk scale: both problems, all algorithms, indicators, report, election.

Usage:
    python scripts/desk_scale.py --out results/desk --runs 10 --generations 200 --jobs 4
"""

import argparse
import logging
from pathlib import Path

from normopt import experiment as ex
from normopt.moea import MoeaConfig


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="results/desk")
    parser.add_argument("--runs", type=int, default=10)
    parser.add_argument("--generations", type=int, default=200)
    parser.add_argument("--eval-samples", type=int, default=1)
    parser.add_argument("--final-samples", type=int, default=500)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--jobs", type=int)
    args = parser.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    moea = MoeaConfig(generations=args.generations, eval_samples=args.eval_samples, final_samples=args.final_samples)
    for problem in ("two", "five"):
        config = ex.ExperimentConfig(problem=problem, runs=args.runs, moea=moea, out=args.out, master_seed=args.seed)
        result = ex.optimize(config, jobs=args.jobs)
        indicators = ex.compute_indicators(result.directory)
        print(f"\n## {problem} objectives\n\n{indicators.table.to_markdown()}")
        election = ex.reason(result.directory / "pf_known.csv", seed=args.seed, out=result.directory)
        print(election.to_markdown())
    ex.build_report(Path(args.out))


if __name__ == "__main__":
    main()
