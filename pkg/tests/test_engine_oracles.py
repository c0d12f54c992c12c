"""Engine cross-checks against brute force on random small trees."""

import random

import pytest

from offchain_games.analysis import (COALITION_PROPERTIES, Property, check_resilience,
                                     check_weak_immune, find_extension, spe_histories,
                                     spe_strategy_for, is_spe)
from offchain_games.game import Restriction, reachable_leaves, play_out

import oracles

N_TREES = 300
# the acceptance suite runs seeds 0..299; this module covers a further block
EXTRA_SEEDS = range(N_TREES, N_TREES + 100)


def check_reachable(tree, rng):
    sigma = next(oracles.all_strategies(tree.root)) if rng.random() < 0.3 else {
        p: rng.choice(n.labels) for p, n in oracles.decision_nodes(tree.root)}
    for size in range(tree.n_players + 1):
        free = frozenset(rng.sample(range(tree.n_players), size))
        got = [h for h, _ in reachable_leaves(tree, Restriction(free, sigma))]
        assert len(got) == len(set(got))
        assert set(got) == oracles.reachable_by_enumeration(tree, free, sigma)


def check_spe(tree):
    expected = oracles.spe_histories_brute(tree)
    got = spe_histories(tree)
    assert set(got) == expected
    for h in got:
        witness = spe_strategy_for(tree, h)
        assert play_out(tree, witness) == h
        assert oracles.is_spe_brute(tree, witness)


def check_extension(tree, rng):
    histories = oracles.terminal_histories(tree)
    for beta in rng.sample(histories, min(2, len(histories))):
        for prop in (Property.WEAK_IMMUNE,) + COALITION_PROPERTIES:
            found = find_extension(tree, beta, prop)
            if prop is Property.WEAK_IMMUNE:
                ok = lambda s: check_weak_immune(tree, s).holds
            else:
                ok = lambda s, prop=prop: check_resilience(tree, s, prop).holds
            exists = any(ok(s) for s in oracles.extensions(tree, beta))
            assert found.holds == exists, (beta, prop, found.to_json())
            if found.holds:
                assert play_out(tree, found.witness) == beta


def check_two_player_collapse(rng):
    tree = oracles.random_tree(rng, n_players=2)
    for _ in range(3):
        sigma = {p: rng.choice(n.labels) for p, n in oracles.decision_nodes(tree.root)}
        assert (check_resilience(tree, sigma, Property.CR).holds
                == check_resilience(tree, sigma, Property.NASH).holds)


def check_practical_is_nash(tree):
    for h in spe_histories(tree):
        assert find_extension(tree, h, Property.NASH).holds


def run_seed(seed):
    rng = random.Random(seed)
    tree = oracles.random_tree(rng)
    check_reachable(tree, rng)
    check_spe(tree)
    check_extension(tree, rng)
    check_two_player_collapse(rng)
    check_practical_is_nash(tree)


@pytest.mark.parametrize("block", range(10))
def test_random_trees_agree_with_brute_force(block):
    for seed in EXTRA_SEEDS[block::10]:
        run_seed(seed)


def test_spe_witnesses_pass_definitional_check():
    rng = random.Random(1234)
    for _ in range(40):
        tree = oracles.random_tree(rng)
        for h in spe_histories(tree):
            assert is_spe(tree, spe_strategy_for(tree, h)).holds
