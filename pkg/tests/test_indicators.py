import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from normopt.errors import ContractError
from normopt.front import Front
from normopt.indicators import (
    HYPERVOLUME,
    IGD_PLUS,
    IndicatorBatch,
    compare_algorithms,
    exact_hypervolume,
    hypervolume,
    igd_plus,
    kruskal_wallis,
    measure_hypervolume,
    monte_carlo_hypervolume,
    nadir_point,
    nondominated_filter,
)


def brute_nondominated(P):
    keep = []
    for i, p in enumerate(P):
        dominated = any(np.all(q >= p) and np.any(q > p) for q in P)
        duplicate = any(np.array_equal(P[j], p) for j in keep)
        if not dominated and not duplicate:
            keep.append(i)
    return P[keep]


def inclusion_exclusion(P, ref):
    """Union volume of boxes by inclusion-exclusion (small sets only)."""
    total = 0.0
    for k in range(1, len(P) + 1):
        for subset in itertools.combinations(range(len(P)), k):
            corner = P[list(subset)].min(axis=0)
            total += (-1) ** (k + 1) * np.prod(np.maximum(corner - ref, 0))
    return total


# --- filtering and nadir ----------------------------------------------------------------------


def test_incomparable_points_all_kept():
    P = np.array([[1, 0], [0, 1], [0.4, 0.4]])
    np.testing.assert_array_equal(nondominated_filter(P), P)
    np.testing.assert_array_equal(nondominated_filter(np.array([[1, 1], [0.5, 0.5]])), [[1, 1]])


def test_filter_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(20):
        P = rng.integers(0, 5, (100, 3)).astype(float)
        np.testing.assert_array_equal(nondominated_filter(P), brute_nondominated(P))


def test_filter_keeps_duplicates_once_and_carries_genomes():
    front = Front(np.arange(36.0).reshape(3, 12), [[1, 2], [1, 2], [0, 0]], ("Equality", "Fairness"))
    kept = nondominated_filter(front)
    assert len(kept) == 1
    np.testing.assert_array_equal(kept.genes, front.genes[:1])


def test_filter_rejects_empty():
    with pytest.raises(ContractError):
        nondominated_filter(np.empty((0, 2)))


def test_nadir():
    np.testing.assert_array_equal(nadir_point([np.array([[1, 0]]), np.array([[0, 1]])]), [0, 0])
    np.testing.assert_array_equal(nadir_point(np.array([[0.3, 0.7]])), [0.3, 0.7])
    with pytest.raises(ContractError):
        nadir_point([])


# --- hypervolume ---------------------------------------------------------------------------


def test_hypervolume_worked_examples():
    assert hypervolume([[0.5, 0.5]], [0, 0]) == 0.25
    assert hypervolume([[1, 0.5], [0.5, 1]], [0, 0]) == 0.75


def test_reference_not_dominated_gives_zero():
    assert hypervolume([[0.5, 0.5]], [1, 1]) == 0.0
    # Points outside the reference box are clipped out.
    assert hypervolume([[0.5, 0.5], [2, -1]], [0, 0]) == 0.25


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_exact_matches_inclusion_exclusion(m):
    rng = np.random.default_rng(m)
    for _ in range(10):
        P = rng.random((int(rng.integers(1, 8)), m))
        ref = -rng.random(m) * 0.1
        assert exact_hypervolume(P, ref) == pytest.approx(inclusion_exclusion(P, ref), rel=1e-10, abs=1e-14)


def test_exact_matches_monte_carlo_3d():
    rng = np.random.default_rng(1)
    P = rng.random((20, 3))
    P /= np.linalg.norm(P, axis=1, keepdims=True)
    estimate = monte_carlo_hypervolume(P, np.zeros(3), samples=200_000, seed=2)
    assert abs(exact_hypervolume(P, np.zeros(3)) - estimate.value) <= 3 * estimate.stderr


def test_large_five_objective_front_uses_labeled_estimate():
    rng = np.random.default_rng(3)
    P = rng.random((600, 5))
    P /= P.sum(axis=1, keepdims=True)
    result = measure_hypervolume(P, np.zeros(5), samples=50_000)
    assert result.method == "monte-carlo" and result.stderr > 0
    small = measure_hypervolume(P[:50], np.zeros(5))
    assert small.method == "exact" and small.stderr == 0


points_2to4 = st.integers(2, 4).flatmap(
    lambda m: arrays(np.float64, st.tuples(st.integers(1, 12), st.just(m)), elements=st.floats(0, 1))
)


@settings(max_examples=60, deadline=None)
@given(points_2to4, st.randoms(use_true_random=False))
def test_hypervolume_properties(P, random):
    ref = np.full(P.shape[1], -0.01)
    value = hypervolume(P, ref)
    # Order independence and invariance under filtering.
    perm = list(range(len(P)))
    random.shuffle(perm)
    assert hypervolume(P[perm], ref) == pytest.approx(value, rel=1e-12, abs=1e-15)
    assert hypervolume(nondominated_filter(P), ref) == pytest.approx(value, rel=1e-12, abs=1e-15)
    # Monotone when a point is added.
    extra = np.vstack([P, P.max(axis=0) * 0.5 + 0.25])
    assert hypervolume(extra, ref) >= value - 1e-12


# --- IGD+ ---------------------------------------------------------------------------------


def test_igd_plus_worked_examples():
    Z = np.array([[1, 0], [0.5, 0.5], [0, 1]])
    assert igd_plus(Z, Z) == 0
    assert igd_plus([[0.5, 0.5]], [[1, 1]]) == pytest.approx(0.70711, abs=1e-5)
    assert igd_plus([[2, 2]], [[1, 1]]) == 0


def test_igd_plus_zero_iff_weakly_dominated():
    t = np.linspace(0, 1, 10)
    Z = np.column_stack([t, 1 - t])  # mutually non-dominated
    assert igd_plus(Z + 0.01, Z) == 0
    assert igd_plus(Z[1:], Z) > 0


def test_igd_plus_rejects_mismatched_sets():
    a = Front(np.zeros((1, 12)), [[1, 1]], ("Equality", "Fairness"))
    b = Front(np.zeros((1, 12)), [[1, 1]], ("Equality", "Wealth"))
    with pytest.raises(ContractError):
        igd_plus(a, b)
    with pytest.raises(ContractError):
        igd_plus([[1, 1]], [[1, 1, 1]])


# --- Kruskal-Wallis and comparison ---------------------------------------------------------------


def test_kruskal_wallis_worked_examples():
    H, p = kruskal_wallis([1, 2, 3], [4, 5, 6])
    assert H == pytest.approx(3.857, abs=1e-3)
    assert p == pytest.approx(0.0495, abs=1e-3)
    assert kruskal_wallis([2, 2, 2], [2, 2]) == (0.0, 1.0)
    assert kruskal_wallis([[1, 2], [1, 2]])[1] == pytest.approx(1.0)


def test_kruskal_wallis_tie_correction():
    # Ranks [1.5, 1.5, 3] vs [4, 5.5, 5.5]: uncorrected H = 12/42 * (36/3 + 225/3) - 21,
    # two pairs of ties divide it by 1 - 12 / (6^3 - 6).
    H, _ = kruskal_wallis([1, 1, 2], [3, 4, 4])
    assert H == pytest.approx(((12 / 42) * (36 / 3 + 225 / 3) - 21) / (1 - 12 / 210))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=2, max_size=8), st.lists(st.integers(-50, 50), min_size=1, max_size=8))
def test_kruskal_wallis_invariant_under_monotone_maps(a, b):
    a, b = np.array(a, dtype=float), np.array(b, dtype=float)
    H, p = kruskal_wallis(a, b)
    H2, p2 = kruskal_wallis(a**3 + a, b**3 + b)
    assert H == pytest.approx(H2) and p == pytest.approx(p2)


def test_kruskal_wallis_contract():
    with pytest.raises(ContractError):
        kruskal_wallis([1, 2])
    with pytest.raises(ContractError):
        kruskal_wallis([1], [2])


def batch(name, hv, igd):
    return IndicatorBatch(name, hv, igd, seeds=tuple(range(len(hv))))


def test_strictly_better_algorithm_is_best_and_untied():
    table = compare_algorithms([batch("A", [0.9] * 10 + [0.91], [0.1] * 11), batch("B", np.linspace(0, 0.5, 11), [0.5] * 11)])
    assert table[HYPERVOLUME].best == "A" and not table[HYPERVOLUME].tied["B"]
    assert table[IGD_PLUS].best == "A" and not table[IGD_PLUS].tied["B"]


def test_identical_batches_are_tied():
    values = np.linspace(0, 1, 30)
    table = compare_algorithms({"A": batch("A", values, values), "B": batch("B", values, values)})
    assert table[HYPERVOLUME].tied["B"] and table[HYPERVOLUME].p_values["B"] == pytest.approx(1.0)


def test_table_layout():
    table = compare_algorithms([batch("A", [1, 1], [0, 0]), batch("B", [0.5, 0.7], [0.1, 0.3])])
    assert table[HYPERVOLUME].std["A"] == 0.0
    assert table[HYPERVOLUME].max["B"] == 0.7
    md = table.to_markdown()
    for row in ("| A | mean |", "| A | std |", "| A | max |", "| B | mean |"):
        assert row in md
    data = table.to_dict()
    assert set(data["indicators"][IGD_PLUS]["algorithms"]["B"]) == {"mean", "std", "max", "p_value_vs_best", "tied_with_best"}


def test_comparison_contract():
    with pytest.raises(ContractError):
        compare_algorithms([batch("A", [1], [1])])
    with pytest.raises(ContractError):
        compare_algorithms([batch("A", [1], [1]), batch("B", [1, 2], [1, 2])])
