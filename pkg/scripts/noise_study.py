"""How the number of simulation paths per fitness evaluation affects the 2-objective front.

For each ``eval_samples`` value, runs NSGA-II batches, re-scores the final
fronts with many paths, and prints the best re-scored Equality and Fairness
next to the best values the search believed it had found.

Usage:
    python scripts/noise_study.py --samples 1 2 5 --runs 6 --generations 200
"""

import argparse

from normopt.moea import NSGA2, MoeaConfig, TaxProblem, evolve


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, nargs="+", default=[1, 2, 5])
    parser.add_argument("--runs", type=int, default=6)
    parser.add_argument("--generations", type=int, default=200)
    parser.add_argument("--final-samples", type=int, default=2000)
    args = parser.parse_args()

    problem = TaxProblem()
    print("eval_samples | run | search best Fairness | re-scored best Fairness | re-scored best Equality")
    for samples in args.samples:
        for run in range(args.runs):
            config = MoeaConfig(
                algorithm=NSGA2, generations=args.generations, eval_samples=samples, final_samples=0, seed=run
            )
            front = evolve(problem, config)
            rescored = problem.reevaluate(front.genes, args.final_samples, run)
            print(
                f"{samples:12d} | {run:3d} | {front.objectives[:, 1].max():20.3f} | "
                f"{rescored[:, 1].max():23.3f} | {rescored[:, 0].max():23.3f}"
            )
    print(f"(re-scored with {args.final_samples} paths per solution)")


if __name__ == "__main__":
    main()
