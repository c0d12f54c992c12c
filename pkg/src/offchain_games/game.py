"""Perfect-information game trees, strategies and normal-form games.

Nodes are identified by their root path, the tuple of action labels that
leads to them.  Trees, strategies and normal-form games are immutable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Sequence, Union

from .errors import NoSuchHistory, StrategyIncomplete
from .utility import UtilityValue

History = tuple[str, ...]
# label of the only strategy of a player who never moves
NO_DECISION = "*"
Utilities = tuple[UtilityValue, ...]


@dataclass(frozen=True)
class Player:
    id: int
    name: str


@dataclass(frozen=True)
class Leaf:
    utilities: Utilities

    def __post_init__(self) -> None:
        object.__setattr__(self, "utilities",
                           tuple(UtilityValue.of(u) for u in self.utilities))


@dataclass(frozen=True)
class Internal:
    player: int
    actions: tuple[tuple[str, "Node"], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "actions", tuple((str(a), n) for a, n in self.actions))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.actions)

    def child(self, label: str) -> "Node":
        for a, n in self.actions:
            if a == label:
                return n
        raise KeyError(label)


Node = Union[Leaf, Internal]


def leaf(*utilities: object) -> Leaf:
    return Leaf(tuple(UtilityValue.of(u) for u in utilities))  # type: ignore[arg-type]


def internal(player: int, children: Union[Mapping[str, Node], Sequence[tuple[str, Node]]]) -> Internal:
    pairs = list(children.items()) if isinstance(children, Mapping) else list(children)
    return Internal(player, tuple(pairs))


@dataclass(frozen=True)
class GameTree:
    players: tuple[Player, ...]
    root: Node

    @classmethod
    def build(cls, player_names: Sequence[str], root: Node) -> "GameTree":
        return cls(tuple(Player(i, n) for i, n in enumerate(player_names)), root)

    @property
    def n_players(self) -> int:
        return len(self.players)

    def player_named(self, name: str) -> Player:
        for p in self.players:
            if p.name == name:
                return p
        raise KeyError(name)

    def names(self, ids: Iterable[int]) -> list[str]:
        return [self.players[i].name for i in ids]


class JointStrategy(Mapping[History, str]):
    """One chosen action label per internal node, keyed by node path.

    A strategy may be partial while it is being assembled; checkers that
    need a total map report :class:`StrategyIncomplete`.
    """

    __slots__ = ("_choice",)

    def __init__(self, choice: Union[Mapping[History, str], Iterable[tuple[History, str]]] = ()):
        items = choice.items() if isinstance(choice, Mapping) else choice
        self._choice: dict[History, str] = {tuple(k): str(v) for k, v in items}

    def __getitem__(self, path: History) -> str:
        return self._choice[path]

    def __iter__(self) -> Iterator[History]:
        return iter(self._choice)

    def __len__(self) -> int:
        return len(self._choice)

    def __repr__(self) -> str:
        return f"JointStrategy({self._choice!r})"

    def __hash__(self) -> int:
        return hash(frozenset(self._choice.items()))

    def updated(self, changes: Mapping[History, str]) -> "JointStrategy":
        merged = dict(self._choice)
        merged.update(changes)
        return JointStrategy(merged)

    def restricted_to(self, paths: Iterable[History]) -> "JointStrategy":
        return JointStrategy({p: self._choice[p] for p in paths if p in self._choice})


def iter_nodes(node: Node, path: History = ()) -> Iterator[tuple[History, Node]]:
    """Pre-order walk, children visited left to right."""
    stack: list[tuple[History, Node]] = [(path, node)]
    while stack:
        p, n = stack.pop()
        yield p, n
        if isinstance(n, Internal):
            for a, c in reversed(n.actions):
                stack.append((p + (a,), c))


def internal_nodes(tree: GameTree) -> list[tuple[History, Internal]]:
    return [(p, n) for p, n in iter_nodes(tree.root) if isinstance(n, Internal)]


def all_leaves(tree: GameTree) -> list[tuple[History, Utilities]]:
    return [(p, n.utilities) for p, n in iter_nodes(tree.root) if isinstance(n, Leaf)]


def node_at(tree: GameTree, history: Sequence[str]) -> Node:
    node = tree.root
    for depth, label in enumerate(history):
        if not isinstance(node, Internal):
            raise NoSuchHistory(f"history {list(history)} runs past a leaf after {depth} actions")
        try:
            node = node.child(label)
        except KeyError:
            raise NoSuchHistory(
                f"action {label!r} not available after {list(history[:depth])}; "
                f"options are {list(node.labels)}") from None
    return node


def is_terminal(tree: GameTree, history: Sequence[str]) -> bool:
    return isinstance(node_at(tree, history), Leaf)


def require_terminal(tree: GameTree, history: Sequence[str]) -> Utilities:
    node = node_at(tree, history)
    if not isinstance(node, Leaf):
        raise NoSuchHistory(f"history {list(history)} does not end at a leaf")
    return node.utilities


def play_out(tree: GameTree, sigma: Mapping[History, str], start: History = ()) -> History:
    """Follow ``sigma`` from the node at ``start`` down to a leaf."""
    node = node_at(tree, start)
    path = tuple(start)
    while isinstance(node, Internal):
        if path not in sigma:
            raise StrategyIncomplete(f"no choice at node {list(path)}")
        label = sigma[path]
        try:
            node = node.child(label)
        except KeyError:
            raise StrategyIncomplete(f"choice {label!r} at {list(path)} is not an action there") from None
        path = path + (label,)
    return path


def outcome(tree: GameTree, sigma: Mapping[History, str], start: History = ()) -> Utilities:
    return require_terminal(tree, play_out(tree, sigma, start))


def subgame_at(tree: GameTree, history: Sequence[str]) -> GameTree:
    return GameTree(tree.players, node_at(tree, history))


@dataclass(frozen=True)
class Restriction:
    """Which players may deviate, what everyone else does, and an optional forced prefix."""
    free_players: frozenset[int]
    fixed: Mapping[History, str] = field(default_factory=dict)
    pinned_prefix: Optional[History] = None


def reachable_leaves(tree: GameTree, r: Restriction, start: History = ()) -> list[tuple[History, Utilities]]:
    """Leaves reachable when only ``r.free_players`` may choose.

    Paths in the result are absolute even when the walk begins at ``start``.
    """
    pin = tuple(r.pinned_prefix) if r.pinned_prefix is not None else ()
    out: list[tuple[History, Utilities]] = []
    stack: list[tuple[History, Node]] = [(tuple(start), node_at(tree, start))]
    while stack:
        path, node = stack.pop()
        if isinstance(node, Leaf):
            out.append((path, node.utilities))
            continue
        depth = len(path)
        if depth < len(pin) and path == pin[:depth]:
            labels = [pin[depth]]
        elif node.player in r.free_players:
            labels = list(node.labels)
        else:
            if path not in r.fixed:
                raise StrategyIncomplete(f"restriction fixes no action at node {list(path)}")
            labels = [r.fixed[path]]
        for label in reversed(labels):
            try:
                child = node.child(label)
            except KeyError:
                raise StrategyIncomplete(f"action {label!r} not available at {list(path)}") from None
            stack.append((path + (label,), child))
    return out


@dataclass(frozen=True)
class Defect:
    kind: str
    path: History
    message: str

    def __str__(self) -> str:
        return f"{self.kind} at {list(self.path)}: {self.message}"


def validate(tree: GameTree) -> list[Defect]:
    """Return structural defects; an empty list means the tree is well formed."""
    defects: list[Defect] = []
    n = tree.n_players
    if [p.id for p in tree.players] != list(range(n)):
        defects.append(Defect("player ids", (), "player ids must be 0..n-1 in order"))
    names = [p.name for p in tree.players]
    if len(set(names)) != len(names):
        defects.append(Defect("duplicate player", (), f"player names not unique: {names}"))
    for path, node in iter_nodes(tree.root):
        if isinstance(node, Leaf):
            if len(node.utilities) != n:
                defects.append(Defect("leaf arity", path,
                                      f"{len(node.utilities)} utilities for {n} players"))
            continue
        if not (0 <= node.player < n):
            defects.append(Defect("unknown player", path, f"owner index {node.player}"))
        if not node.actions:
            defects.append(Defect("no actions", path, "internal node without children"))
        labels = node.labels
        if len(set(labels)) != len(labels):
            defects.append(Defect("ambiguous action", path, f"duplicate labels in {list(labels)}"))
        for a in labels:
            if not a:
                defects.append(Defect("empty label", path, "action label is empty"))
            elif "," in a:
                defects.append(Defect("reserved character", path, f"label {a!r} contains ','"))
    return defects


# ---------------------------------------------------------------- normal form

@dataclass(frozen=True)
class NormalFormGame:
    players: tuple[Player, ...]
    strategy_labels: tuple[tuple[str, ...], ...]
    payoffs: Mapping[tuple[int, ...], Utilities]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.strategy_labels)

    def profiles(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(k) for k in self.shape))

    def utility(self, profile: Sequence[int]) -> Utilities:
        return self.payoffs[tuple(profile)]

    def index_of(self, labels: Sequence[str]) -> tuple[int, ...]:
        if len(labels) != len(self.players):
            raise NoSuchHistory(f"profile needs {len(self.players)} labels, got {len(labels)}")
        idx = []
        for p, lab in enumerate(labels):
            try:
                idx.append(self.strategy_labels[p].index(lab))
            except ValueError:
                raise NoSuchHistory(
                    f"player {self.players[p].name} has no strategy {lab!r}") from None
        return tuple(idx)

    def labels_of(self, profile: Sequence[int]) -> tuple[str, ...]:
        return tuple(self.strategy_labels[p][i] for p, i in enumerate(profile))

    def defects(self) -> list[str]:
        out = []
        for prof in self.profiles():
            if prof not in self.payoffs:
                out.append(f"missing payoff for {self.labels_of(prof)}")
            elif len(self.payoffs[prof]) != len(self.players):
                out.append(f"payoff arity at {self.labels_of(prof)}")
        if len(self.payoffs) != len(list(self.profiles())):
            out.append("payoff table has entries outside the strategy grid")
        return out


def _full_plans(tree: GameTree, player: int) -> list[tuple[list[History], tuple[str, ...]]]:
    nodes = [(p, n) for p, n in internal_nodes(tree) if n.player == player]
    paths = [p for p, _ in nodes]
    return [(paths, combo) for combo in itertools.product(*(n.labels for _, n in nodes))]


def _reduced_plans(node: Node, path: History, player: int) -> list[dict[History, str]]:
    if isinstance(node, Leaf):
        return [{}]
    if node.player == player:
        plans = []
        for a, child in node.actions:
            for sub in _reduced_plans(child, path + (a,), player):
                plans.append({path: a, **sub})
        return plans
    # another player's node: our plan has to cover every branch
    per_child = [_reduced_plans(c, path + (a,), player) for a, c in node.actions]
    plans = []
    for combo in itertools.product(*per_child):
        merged: dict[History, str] = {}
        for part in combo:
            merged.update(part)
        plans.append(merged)
    return plans


def efg_to_nfg(tree: GameTree, reduced: bool = False) -> NormalFormGame:
    """Translate a tree into strategic form.

    With ``reduced`` set, strategies that differ only at nodes the player's
    own earlier choices make unreachable are merged; each is labelled by the
    dash-joined actions at its decided nodes in pre-order.
    """
    order = {p: i for i, (p, _) in enumerate(iter_nodes(tree.root))}
    per_player: list[list[dict[History, str]]] = []
    for pl in tree.players:
        if reduced:
            plans = _reduced_plans(tree.root, (), pl.id)
        else:
            plans = [dict(zip(paths, combo)) for paths, combo in _full_plans(tree, pl.id)]
        per_player.append(plans)
    labels = tuple(
        tuple("-".join(plan[k] for k in sorted(plan, key=order.__getitem__)) or NO_DECISION
              for plan in plans)
        for plans in per_player)
    payoffs: dict[tuple[int, ...], Utilities] = {}
    for prof in itertools.product(*(range(len(p)) for p in per_player)):
        sigma: dict[History, str] = {}
        for pl, i in enumerate(prof):
            sigma.update(per_player[pl][i])
        payoffs[prof] = outcome(tree, sigma)
    return NormalFormGame(tree.players, labels, payoffs)


def enumerate_strategies(tree: GameTree, nodes: Optional[Sequence[History]] = None) -> Iterator[JointStrategy]:
    """Every assignment of actions to the given internal nodes (all by default)."""
    table = dict(internal_nodes(tree))
    paths = list(table) if nodes is None else list(nodes)
    for combo in itertools.product(*(table[p].labels for p in paths)):
        yield JointStrategy(zip(paths, combo))
