import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normopt.moea.operators import (
    make_offspring,
    norm_space,
    polynomial_delta,
    polynomial_mutation,
    repair,
    sbx_children,
    sbx_crossover,
    sbx_spread,
)

SPACE = norm_space()


def genome(redistribute=(0.2,) * 5, catch=0.3):
    return np.array([0.5] * 5 + list(redistribute) + [catch, 0.4])


def on_simplex(genes):
    block = genes[..., 5:10]
    return np.all(block >= 0) and np.allclose(block.sum(axis=-1), 1.0, atol=1e-9)


def test_repair_examples():
    np.testing.assert_array_equal(repair(genome(), SPACE), genome())
    assert repair(genome((1, 1, 1, 1, 1)), SPACE)[5:10].tolist() == [0.2] * 5
    assert repair(genome(catch=0.9), SPACE)[10] == 0.5


def test_repair_zero_block_becomes_uniform():
    assert repair(genome((0, -1, 0, 0, -3)), SPACE)[5:10].tolist() == [0.2] * 5


@settings(max_examples=300)
@given(st.lists(st.floats(-5, 5), min_size=12, max_size=12))
def test_repair_lands_in_bounds_and_on_simplex(raw):
    out = repair(np.array(raw), SPACE)
    assert np.all(out >= SPACE.lower) and np.all(out <= SPACE.upper)
    assert on_simplex(out)


def test_sbx_beta_one_at_half():
    assert sbx_spread(0.5, 20) == pytest.approx(1.0)
    c1, c2 = sbx_children(0.2, 0.7, 1.0)
    assert (c1, c2) == (pytest.approx(0.2), pytest.approx(0.7))


def test_sbx_zero_probability_copies_parents():
    rng = np.random.default_rng(0)
    p1, p2 = SPACE.random(8, rng), SPACE.random(8, rng)
    c1, c2 = sbx_crossover(p1, p2, 20, 0.0, rng, SPACE)
    np.testing.assert_array_equal(c1, p1)
    np.testing.assert_array_equal(c2, p2)


def test_sbx_mean_preservation_bulk():
    rng = np.random.default_rng(1)
    p1 = rng.uniform(-1, 2, (10_000, 12))
    p2 = rng.uniform(-1, 2, (10_000, 12))
    c1, c2 = sbx_crossover(p1, p2, 20, 1.0, rng)
    np.testing.assert_allclose((c1 + c2) / 2, (p1 + p2) / 2, atol=1e-12)


def test_polynomial_delta_zero_at_half():
    assert polynomial_delta(0.3, 0.0, 1.0, 0.5, 20) == pytest.approx(0.0, abs=1e-15)


def test_mutation_zero_probability_is_identity():
    rng = np.random.default_rng(2)
    genes = SPACE.random(10, rng)
    np.testing.assert_array_equal(polynomial_mutation(genes, 20, 0.0, rng, SPACE), genes)


def test_mutation_respects_bounds_bulk():
    rng = np.random.default_rng(3)
    genes = SPACE.random(10_000, rng)
    out = polynomial_mutation(genes, 20, 1.0, rng, SPACE)
    assert np.all(out >= SPACE.lower) and np.all(out <= SPACE.upper)
    assert on_simplex(out)
    u = rng.random(genes.shape)
    raw = genes + polynomial_delta(genes, SPACE.lower, SPACE.upper, u, 20)
    assert np.all(raw >= SPACE.lower - 1e-12) and np.all(raw <= SPACE.upper + 1e-12)


def test_offspring_feasible_and_counted():
    rng = np.random.default_rng(4)
    parents = SPACE.random(7, rng)
    children = make_offspring(parents, 7, rng, SPACE, 20, 0.9, 20, 1 / 12)
    assert children.shape == (7, 12)
    assert on_simplex(children)
    assert np.all(children[:, 10] <= 0.5)
