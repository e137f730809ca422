"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Criteria 6 and 7 run real optimization batches and take minutes.
"""

import time
import numpy as np
import pytest

from normopt import experiment as ex
from normopt.front import Front
from normopt.indicators import (
    HYPERVOLUME,
    IGD_PLUS,
    exact_hypervolume,
    hypervolume,
    igd_plus,
    kruskal_wallis,
    monte_carlo_hypervolume,
)
from normopt.moea import ALGORITHMS, MOEADD, MOMBI2, NSGA2, MoeaConfig
from normopt.moea.operators import norm_space, polynomial_mutation, repair, sbx_crossover
from normopt.moea.pareto import fast_nondominated_sort
from normopt.reasoner import make_voters, elect, solutions_from_front
from normopt.society import NormVector, SimulationConfig, init_society, step
from normopt.values import EQUALITY, FAIRNESS

pytestmark = pytest.mark.acceptance


def oracle_ranks(F):
    """Front index of each row by repeatedly peeling the brute-force non-dominated set."""
    ge = np.all(F[:, None, :] >= F[None, :, :], axis=2)
    gt = np.any(F[:, None, :] > F[None, :, :], axis=2)
    dominates = ge & gt  # [j, i]: row j dominates row i, every pair checked
    rank = np.full(len(F), -1)
    level = 0
    while (rank < 0).any():
        alive = rank < 0
        current = alive & ~dominates[alive].any(axis=0)
        rank[current] = level
        level += 1
    return rank


def test_criterion_1_nondominated_sort_oracle(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    mismatches = 0
    for k in range(1000):
        n, m = int(rng.integers(1, 51)), (2, 5)[k % 2]
        # Half the instances use a coarse grid so ties and duplicates are common.
        F = rng.integers(0, 4, (n, m)).astype(float) if k % 4 < 2 else rng.random((n, m))
        _, ranks = fast_nondominated_sort(F)
        mismatches += not np.array_equal(ranks, oracle_ranks(F))
    elapsed = time.perf_counter() - start
    criterion(1, mismatches == 0 and elapsed < 10, f"{mismatches} mismatches in 1000 populations, {elapsed:.1f} s (< 10 s)")


def test_criterion_2_hypervolume_monte_carlo(criterion):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst, outside = 0.0, 0
    for k in range(100):
        m = (2, 3, 5)[k % 3]
        P = rng.random((int(rng.integers(1, 31)), m))
        if k % 2:  # points on a sphere: all mutually non-dominated
            P /= np.linalg.norm(P, axis=1, keepdims=True)
        exact = exact_hypervolume(P, np.zeros(m))
        estimate = monte_carlo_hypervolume(P, np.zeros(m), samples=1_000_000, seed=k)
        z = abs(exact - estimate.value) / estimate.stderr if estimate.stderr else 0.0
        worst = max(worst, z)
        outside += z > 3
    elapsed = time.perf_counter() - start
    criterion(
        2,
        outside == 0 and elapsed < 60,
        f"{outside}/100 fronts outside 3 SE (max {worst:.2f} SE), {elapsed:.1f} s (< 60 s)",
    )


def test_criterion_3_worked_examples(criterion):
    start = time.perf_counter()
    H, p = kruskal_wallis([1, 2, 3], [4, 5, 6])
    values = {
        "HV single box": (hypervolume([[0.5, 0.5]], [0, 0]), 0.25, 0.0),
        "HV two boxes": (hypervolume([[1, 0.5], [0.5, 1]], [0, 0]), 0.75, 0.0),
        "IGD+": (igd_plus([[0.5, 0.5]], [[1, 1]]), 0.70711, 1e-5),
        "KW H": (H, 3.857, 1e-3),
        "KW p": (p, 0.0495, 1e-3),
    }
    elapsed = time.perf_counter() - start
    bad = [f"{k}={v!r}" for k, (v, want, tol) in values.items() if abs(v - want) > tol]
    detail = ", ".join(f"{k} {v:.5f}" for k, (v, _, _) in values.items())
    criterion(3, not bad and elapsed < 1, f"{detail}; {elapsed * 1000:.0f} ms (< 1 s)")


def random_norms(rng):
    redistribute = rng.random(5)
    return NormVector(rng.random(5), redistribute / redistribute.sum(), rng.random() * 0.5, rng.random())


def test_criterion_4_conservation(criterion):
    rng = np.random.default_rng(4)
    worst_zero, worst_ledger, steps = 0.0, 0.0, 0
    for society_seed in range(1000):
        norms = random_norms(rng)
        for interest in (0.0, 0.05):
            config = SimulationConfig(interest_rate=interest, evader_probability=float(rng.random() * 0.3))
            society = init_society(config, society_seed)
            for _ in range(10):
                before = society.wealth.sum()
                society = step(society, norms)
                after = society.wealth.sum()
                if interest == 0.0:
                    worst_zero = max(worst_zero, abs(after - before) / before)
                    steps += 1
                else:
                    collected = society.last_pool / (1 + interest)
                    worst_ledger = max(worst_ledger, abs(after - (before + interest * collected)) / before)
    passed = steps >= 10_000 and worst_zero <= 1e-6 and worst_ledger <= 1e-12
    criterion(
        4,
        passed,
        f"{steps} zero-interest steps, max relative drift {worst_zero:.1e} (<= 1e-6); "
        f"interest ledger max relative error {worst_ledger:.1e}",
    )


def test_criterion_5_operator_properties(criterion):
    rng = np.random.default_rng(5)
    space = norm_space()
    p1, p2 = rng.uniform(-1, 2, (10_000, 12)), rng.uniform(-1, 2, (10_000, 12))
    c1, c2 = sbx_crossover(p1, p2, 20, 1.0, rng)
    mean_error = float(np.abs((c1 + c2) / 2 - (p1 + p2) / 2).max())
    genes = space.random(10_000, rng)
    mutated = polynomial_mutation(genes, 20, 1.0, rng, space)
    in_bounds = bool(np.all(mutated >= space.lower) and np.all(mutated <= space.upper))
    raw = rng.uniform(-3, 3, (10_000, 12))
    repaired = repair(raw, space)
    simplex_error = float(np.abs(repaired[:, 5:10].sum(axis=1) - 1).max())
    nonnegative = bool(np.all(repaired[:, 5:10] >= 0))
    passed = mean_error <= 1e-12 and in_bounds and simplex_error <= 1e-9 and nonnegative
    criterion(
        5,
        passed,
        f"SBX max mean shift {mean_error:.1e}; mutation in bounds: {in_bounds}; "
        f"repair max simplex error {simplex_error:.1e}, nonnegative: {nonnegative}",
    )


def test_criterion_6_algorithm_ordering(criterion, tmp_path):
    # Desk scale: 10 runs x 200 generations at the default population sizes.
    # Search uses the default paths per evaluation; final re-scoring uses 500
    # paths instead of 5000 because five-objective fronts hold up to 210 members.
    moea = MoeaConfig(generations=200, final_samples=500)
    start = time.perf_counter()
    tables = {}
    for problem in ("two", "five"):
        config = ex.ExperimentConfig(problem=problem, runs=10, moea=moea, out=str(tmp_path), master_seed=2024)
        result = ex.optimize(config)
        assert not result.failures, result.failures
        tables[problem] = ex.compute_indicators(result.directory).table
    elapsed = time.perf_counter() - start
    two_hv, five_igd = tables["two"][HYPERVOLUME], tables["five"][IGD_PLUS]
    hv_order = two_hv.mean[NSGA2] > two_hv.mean[MOMBI2]
    igd_best = five_igd.best == MOEADD or five_igd.tied[MOEADD]
    passed = hv_order and igd_best and elapsed <= 30 * 60
    criterion(
        6,
        passed,
        f"2-obj HV mean NSGA-II {two_hv.mean[NSGA2]:.4f} vs MOMBI2 {two_hv.mean[MOMBI2]:.4f}; "
        f"5-obj IGD+ means {', '.join(f'{a} {five_igd.mean[a]:.4f}' for a in ALGORITHMS)} "
        f"(best {five_igd.best}, MOEA/DD p={five_igd.p_values[MOEADD]:.3g}); "
        f"{elapsed / 60:.1f} min on {ex.available_parallelism()} CPU(s) (<= 30 min)",
    )


def test_criterion_7_front_quality(criterion, tmp_path):
    config = ex.ExperimentConfig(problem="two", algorithms=(NSGA2,), out=str(tmp_path))
    start = time.perf_counter()
    result = ex.optimize(config)
    elapsed = time.perf_counter() - start
    assert not result.failures, result.failures
    combined = Front.merge([ex.read_front(p) for p in result.fronts()[NSGA2]])
    eq = combined.objectives[:, combined.objective_set.index(EQUALITY)]
    fair = combined.objectives[:, combined.objective_set.index(FAIRNESS)]
    quality = eq.max() >= 0.8 and fair.max() >= 0.7 and eq.max() >= 0.9
    best_fair = int(np.argmax(fair))
    criterion(
        7,
        bool(quality) and elapsed <= 10 * 60,
        f"{config.runs} runs x {config.moea.generations} gens, eval_samples {config.moea.eval_samples}, "
        f"re-evaluated with {config.moea.final_samples} paths: max Equality {eq.max():.3f} (>= 0.9), "
        f"max Fairness {fair.max():.3f} (>= 0.7) at Equality {eq[best_fair]:.3f}; "
        f"{elapsed / 60:.1f} min on {ex.available_parallelism()} CPU(s) (<= 10 min)",
    )


def test_criterion_8_election_closure(criterion, tmp_path):
    config = ex.ExperimentConfig(
        problem="two", algorithms=(NSGA2,), runs=1, out=str(tmp_path),
        moea=MoeaConfig(generations=10, population_size=20, final_samples=20),
    )
    path = ex.optimize(config, jobs=1).fronts()[NSGA2][0]
    produced = ex.read_front(path)
    start = time.perf_counter()
    rng = np.random.default_rng(8)
    failures = 0
    for trial in range(100):
        # Random subsets of the produced front plus random synthetic fronts.
        if trial % 2:
            front = produced
        else:
            size = int(rng.integers(1, 40))
            genes = rng.random((size, 12))
            genes[:, 5:10] /= genes[:, 5:10].sum(axis=1, keepdims=True)
            genes[:, 10] *= 0.5
            front = Front(genes, rng.random((size, 2)), produced.objective_set)
        seed = int(rng.integers(0, 2**63))
        mode = ("weighted", "literal")[trial % 4 // 2]
        first = elect(make_voters(200, seed), front, mode)
        again = elect(make_voters(200, seed), front, mode)
        members = solutions_from_front(front)
        failures += not (first.solution in members and first.winner == again.winner and first.tally.sum() == 200)
    cli = ex.reason(path, voters=200, seed=3)
    failures += cli.solution not in solutions_from_front(produced)
    elapsed = time.perf_counter() - start
    criterion(8, failures == 0 and elapsed < 5, f"{failures} failures in 100 trials + CLI front, {elapsed:.2f} s (< 5 s)")


def test_criterion_9_reproducibility(criterion, tmp_path):
    from normopt.cli import main

    # Smoke scale: re-scoring uses 200 paths per solution instead of 5000.
    args = ["optimize", "--runs", "2", "--generations", "10", "--population-size", "20", "--seed", "99",
            "--final-samples", "200"]
    start = time.perf_counter()
    codes = [main([*args, "--out", str(tmp_path / name)]) for name in ("a", "b")]
    elapsed = time.perf_counter() - start
    files = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("run_*.csv"))
    identical = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in files)
    passed = codes == [0, 0] and len(files) == 2 * len(ALGORITHMS) and identical and elapsed < 30
    criterion(
        9,
        passed,
        f"{len(files)} front CSVs from 2 runs x {len(ALGORITHMS)} algorithms, byte-identical: {identical}; "
        f"{elapsed:.1f} s for both batches (< 30 s)",
    )
