import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from normopt.errors import ConfigurationError, ContractError
from normopt.front import Front
from normopt.reasoner import (
    LITERAL,
    VARIABLES,
    WEIGHTED,
    VoterAgent,
    elect,
    fitness,
    get_vote,
    main_reasoner,
    make_voters,
    preference_weights,
    preferred_slot,
    solutions_from_front,
    tally_votes,
)
from normopt.values import TWO_OBJECTIVES

CATCH, FINE = 10, 11


def random_genes(n, seed):
    rng = np.random.default_rng(seed)
    genes = rng.random((n, 12))
    genes[:, 5:10] /= genes[:, 5:10].sum(axis=1, keepdims=True)
    genes[:, CATCH] *= 0.5
    return genes


def make_front(genes):
    objectives = np.column_stack([np.linspace(0, 1, len(genes)), np.linspace(1, 0, len(genes))])
    return Front(genes, objectives, TWO_OBJECTIVES)


def test_voters_have_valid_weights_and_are_reproducible():
    voters = make_voters(200, seed=3)
    assert len(voters) == 200
    for v in voters:
        w = v.weights
        assert abs(w.sum() - 1) <= 1e-9
        assert w[v.slot] == 0.8
        np.testing.assert_allclose(np.delete(w, v.slot), 0.2 / 11)
    assert voters == make_voters(200, seed=3)
    assert {v.preferred_variable for v in voters} == set(VARIABLES)
    assert {v.group for v in voters} == {1, 2, 3, 4, 5}
    with pytest.raises(ContractError):
        make_voters(0, seed=1)


def test_group_variables_resolve_to_own_group():
    assert preferred_slot("collect", 1) == 0
    assert preferred_slot("redistribute", 1) == 5
    assert preferred_slot("redistribute", 5) == 9
    assert preferred_slot("catch", 3) == CATCH and preferred_slot("fine", 2) == FINE
    with pytest.raises(ContractError):
        VoterAgent(group=6, preferred_variable="catch")


def test_fitness_prefers_catch():
    genes = random_genes(2, 0)
    genes[1] = genes[0]
    genes[0, CATCH], genes[1, CATCH] = 0.5, 0.0
    agent = VoterAgent(group=2, preferred_variable="catch")
    assert fitness(genes, agent.weights) == 0


def test_identical_solutions_tie_to_first():
    genes = np.tile(random_genes(1, 1), (4, 1))
    assert fitness(genes, preference_weights(3)) == 0
    assert get_vote(VoterAgent(1, "fine"), genes, LITERAL) == 0


def test_uniform_weights_match_exhaustive_argmax():
    genes = random_genes(5, 2)
    sums = [sum(g) for g in genes]
    best = max(range(5), key=lambda i: (sums[i], -i))
    assert fitness(genes, np.full(12, 1 / 12)) == best


def test_literal_mode_reads_own_group_component():
    genes = random_genes(6, 3)
    agent = VoterAgent(group=1, preferred_variable="redistribute")
    assert get_vote(agent, genes, LITERAL) == int(np.argmax(genes[:, 5]))
    assert get_vote(VoterAgent(4, "fine"), genes, LITERAL) == int(np.argmax(genes[:, FINE]))


def test_modes_agree_when_other_genes_equal():
    genes = np.tile(random_genes(1, 4), (5, 1))
    genes[:, CATCH] = [0.1, 0.4, 0.2, 0.4, 0.0]
    agent = VoterAgent(group=3, preferred_variable="catch")
    assert get_vote(agent, genes, WEIGHTED) == get_vote(agent, genes, LITERAL) == 1


def test_direction_aware_collect_prefers_low_rates():
    genes = np.tile(random_genes(1, 5), (3, 1))
    genes[:, 2] = [0.3, 0.1, 0.6]
    agent = VoterAgent(group=3, preferred_variable="collect")
    assert get_vote(agent, genes, LITERAL) == 2
    assert get_vote(agent, genes, LITERAL, direction_aware=True) == 1
    assert get_vote(agent, genes, WEIGHTED, direction_aware=True) == 1


def test_unknown_mode_rejected():
    with pytest.raises(ConfigurationError):
        get_vote(VoterAgent(1, "fine"), random_genes(2, 0), "ranked")


def test_plurality_and_ties():
    genes = np.tile(random_genes(1, 6), (3, 1))
    genes[:, FINE] = [0.9, 0.1, 0.1]
    genes[:, CATCH] = [0.0, 0.5, 0.0]
    fine_lovers = [VoterAgent(1, "fine")] * 2
    catch_lover = [VoterAgent(1, "catch")]
    front = make_front(genes)
    assert elect(fine_lovers + catch_lover, front).winner == 0
    # One vote each for solutions 0 and 1: the lower index wins.
    assert elect([VoterAgent(1, "fine"), VoterAgent(1, "catch")], front).winner == 0
    assert elect(catch_lover * 3, front).winner == 1


def test_single_voter_and_single_solution():
    genes = random_genes(4, 7)
    voter = make_voters(1, seed=2)
    assert elect(voter, make_front(genes)).winner == get_vote(voter[0], genes)
    lone = make_front(genes[:1])
    assert main_reasoner(make_voters(200, 1), lone) == solutions_from_front(lone)[0]


def test_election_closure_tally_and_report():
    front = make_front(random_genes(30, 8))
    election = elect(make_voters(200, seed=9), front, voter_seed=9)
    assert election.tally.sum() == 200
    assert election.solution in solutions_from_front(front)
    report = election.to_dict()
    assert report["voters"] == 200 and report["voter_seed"] == 9
    assert set(report["objectives"]) == set(TWO_OBJECTIVES)
    assert "catch" in election.to_markdown()
    again = elect(make_voters(200, seed=9), front, voter_seed=9)
    assert again.to_json() == election.to_json()


def test_empty_inputs_rejected():
    with pytest.raises(ContractError):
        tally_votes([], random_genes(2, 0))
    with pytest.raises(ContractError):
        fitness(np.empty((0, 12)), np.full(12, 1 / 12))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 100))
def test_weight_scaling_keeps_the_choice(seed, scale):
    genes = random_genes(8, seed)
    w = make_voters(1, seed)[0].weights
    assert fitness(genes, w) == fitness(genes, w * scale)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 7), st.floats(0.01, 0.5))
def test_adding_worse_solution_changes_no_literal_vote(seed, base, gap):
    genes = random_genes(8, seed)
    worse = genes[base] - gap
    voters = make_voters(50, seed)
    before = [get_vote(v, genes, LITERAL) for v in voters]
    for position in (0, len(genes)):
        extended = np.insert(genes, position, worse, axis=0)
        shift = 1 if position == 0 else 0
        after = [get_vote(v, extended, LITERAL) - shift for v in voters]
        assert after == before
