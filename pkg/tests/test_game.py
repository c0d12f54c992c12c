import random

import pytest

from offchain_games.errors import NoSuchHistory, StrategyIncomplete
from offchain_games.game import (GameTree, Internal, JointStrategy, Leaf, Player, Restriction,
                                 efg_to_nfg, internal, internal_nodes, leaf, outcome, play_out,
                                 reachable_leaves, subgame_at, validate)
from offchain_games.models import ClosingParams, build_closing_game, builtin_fixture
from offchain_games.utility import ALPHA, EPS, UtilityValue

import oracles


@pytest.fixture
def gamma_e():
    return builtin_fixture("GAMMA_E")


@pytest.fixture
def closing():
    return build_closing_game(ClosingParams(2, 2, 1, 1, 1, 1, 1, 1))


def test_play_out_examples(gamma_e):
    assert play_out(gamma_e, {(): "2", ("2",): "3"}) == ("2", "3")
    single = GameTree.build(["A", "B"], leaf(0, 0))
    assert play_out(single, {}) == ()


def test_play_out_incomplete(gamma_e):
    with pytest.raises(StrategyIncomplete):
        play_out(gamma_e, {(): "2"})


def test_honest_strategy_of_closing_game_plays_h(closing):
    sigma = {p: n.labels[0] for p, n in internal_nodes(closing)}
    sigma[()] = "H"
    assert play_out(closing, sigma) == ("H",)


def test_subgame_at(closing):
    s3 = subgame_at(closing, ("C_h", "U+"))
    assert s3.root.player == 0 and s3.root.labels == ("H", "D", "I", "A")
    s2p = subgame_at(closing, ("C_c", "I", "U-"))
    assert s2p.root.player == 1 and s2p.root.labels == ("H", "D", "S", "I", "A")
    assert subgame_at(closing, ()) .root is closing.root
    with pytest.raises(NoSuchHistory):
        subgame_at(closing, ("C_h", "X"))


def test_reachable_leaves_examples(gamma_e, closing):
    everything = reachable_leaves(gamma_e, Restriction(frozenset({0, 1})))
    assert [h for h, _ in everything] == [("1",), ("2", "3"), ("2", "4", "5"), ("2", "4", "6", "7"), ("2", "4", "6", "8")]
    got = reachable_leaves(gamma_e, Restriction(frozenset({0}), {("2",): "3", ("2", "4", "6"): "7"}))
    assert [(h, u) for h, u in got] == [(("1",), (UtilityValue(2), UtilityValue(2))),
                                         (("2", "3"), (UtilityValue(3), UtilityValue(1)))]
    # B follows a fixed honest reply everywhere, A is free
    b_fixed = {p: ("P" if "P" in n.labels else "S" if "S" in n.labels else n.labels[0])
               for p, n in internal_nodes(closing) if n.player == 1}
    leaves = dict(reachable_leaves(closing, Restriction(frozenset({0}), b_fixed)))
    assert ("H",) in leaves and ("C_h", "S") in leaves
    assert leaves[("D", "P")] == (UtilityValue(-2), UtilityValue(1) + ALPHA)


def test_reachable_with_pin(gamma_e):
    got = reachable_leaves(gamma_e, Restriction(frozenset({0, 1}), pinned_prefix=("2", "4")))
    assert [h for h, _ in got] == [("2", "4", "5"), ("2", "4", "6", "7"), ("2", "4", "6", "8")]


def test_reachable_extremes_on_random_trees():
    rng = random.Random(7)
    for _ in range(100):
        tree = oracles.random_tree(rng, max_internal=10, max_strategies=5000)
        sigma = {p: rng.choice(n.labels) for p, n in oracles.decision_nodes(tree.root)}
        everyone = frozenset(range(tree.n_players))
        assert {h for h, _ in reachable_leaves(tree, Restriction(everyone, sigma))} == set(oracles.terminal_histories(tree))
        assert [h for h, _ in reachable_leaves(tree, Restriction(frozenset(), sigma))] == [play_out(tree, sigma)]
        free = frozenset(rng.sample(sorted(everyone), rng.randint(0, tree.n_players)))
        got = {h for h, _ in reachable_leaves(tree, Restriction(free, sigma))}
        assert got == oracles.reachable_by_enumeration(tree, free, sigma)


def test_efg_to_nfg_reduced_gamma_e(gamma_e):
    nfg = efg_to_nfg(gamma_e, reduced=True)
    assert nfg.strategy_labels == (("1", "2-5", "2-6"), ("3", "4-7", "4-8"))
    assert nfg.utility(nfg.index_of(["2-6", "4-8"])) == (UtilityValue(0), UtilityValue(2))
    table = {(r, c): tuple(int(u.real) for u in nfg.utility(nfg.index_of([r, c])))
             for r in nfg.strategy_labels[0] for c in nfg.strategy_labels[1]}
    assert table == {
        ("1", "3"): (2, 2), ("1", "4-7"): (2, 2), ("1", "4-8"): (2, 2),
        ("2-5", "3"): (3, 1), ("2-5", "4-7"): (1, 1), ("2-5", "4-8"): (1, 1),
        ("2-6", "3"): (3, 1), ("2-6", "4-7"): (0, 1), ("2-6", "4-8"): (0, 2),
    }


def test_efg_to_nfg_full_mode(gamma_e):
    nfg = efg_to_nfg(gamma_e)
    assert nfg.shape == (4, 4)
    single = efg_to_nfg(GameTree.build(["A", "B"], leaf(1, -1)))
    assert single.shape == (1, 1) and single.utility((0, 0)) == (UtilityValue(1), UtilityValue(-1))


def test_full_nfg_matches_play_out_on_random_trees():
    rng = random.Random(11)
    for _ in range(60):
        tree = oracles.random_tree(rng, max_internal=5, max_strategies=200)
        nfg = efg_to_nfg(tree)
        per_player = [[p for p, n in oracles.decision_nodes(tree.root) if n.player == q]
                      for q in range(tree.n_players)]
        for prof in nfg.profiles():
            sigma = {}
            for q, i in enumerate(prof):
                label = nfg.strategy_labels[q][i]
                if per_player[q]:
                    sigma.update(zip(per_player[q], label.split("-")))
            assert nfg.utility(prof) == oracles.play(tree.root, sigma)[1]


def test_reduced_nfg_matches_play_out_on_random_trees():
    rng = random.Random(12)
    for _ in range(60):
        tree = oracles.random_tree(rng, max_internal=5, max_strategies=200)
        full, reduced = efg_to_nfg(tree), efg_to_nfg(tree, reduced=True)
        assert all(r <= f for r, f in zip(reduced.shape, full.shape))
        full_outcomes = {full.utility(p) for p in full.profiles()}
        assert {reduced.utility(p) for p in reduced.profiles()} <= full_outcomes


def test_validate(closing):
    assert validate(closing) == []
    bad = GameTree.build(["A", "B"], internal(0, [("x", leaf(1)), ("x", leaf(1, 2))]))
    kinds = {d.kind for d in validate(bad)}
    assert {"leaf arity", "ambiguous action"} <= kinds
    assert {d.kind for d in validate(GameTree.build(["A"], internal(3, [("", leaf(0))])))} == {"unknown player", "empty label"}


def test_joint_strategy_mapping():
    s = JointStrategy({(): "H"})
    assert s[()] == "H" and len(s) == 1
    assert s.updated({("H",): "S"})[("H",)] == "S"
    assert s == JointStrategy([((), "H")])
