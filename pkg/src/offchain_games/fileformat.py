"""Canonical JSON encoding of games, strategies and histories.

Serialization is canonical: the same object always produces the same bytes,
so ``dumps(parse(dumps(x))) == dumps(x)``.
"""

from __future__ import annotations

import json
from typing import Any, Mapping, Union

from .errors import ParseError
from .game import (GameTree, History, Internal, JointStrategy, Leaf, Node,
                   NormalFormGame, Player)
from .utility import UtilityValue


def parse_history(text: str) -> History:
    """``"C_h,S"`` -> ``("C_h", "S")``; the empty string is the empty history."""
    text = text.strip()
    if not text:
        return ()
    labels = tuple(part.strip() for part in text.split(","))
    if any(not lab for lab in labels):
        raise ParseError(f"empty action label in history {text!r}")
    return labels


def format_history(history: History) -> str:
    return "(" + ",".join(history) + ")"


def path_key(path: History) -> str:
    return ",".join(path)


def strategy_to_json(sigma: Mapping[History, str]) -> dict[str, str]:
    return {path_key(p): sigma[p] for p in sigma}


def strategy_from_json(data: Any) -> JointStrategy:
    if not isinstance(data, dict):
        raise ParseError("strategy: expected an object mapping node paths to labels")
    out = {}
    for key, label in data.items():
        if not isinstance(label, str) or not label:
            raise ParseError(f"strategy[{key!r}]: expected a nonempty action label")
        out[parse_history(key)] = label
    return JointStrategy(out)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _no_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    seen: dict[str, Any] = {}
    for k, v in pairs:
        if k in seen:
            raise ParseError(f"duplicate key {k!r}")
        seen[k] = v
    return seen


def loads_json(text: str) -> Any:
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


# ---------------------------------------------------------------- trees

def _node_to_json(node: Node, names: list[str]) -> dict[str, Any]:
    if isinstance(node, Leaf):
        return {"utility": [u.to_json() for u in node.utilities]}
    return {"player": names[node.player],
            "children": {a: _node_to_json(c, names) for a, c in node.actions}}


def game_to_json(tree: GameTree) -> dict[str, Any]:
    names = [p.name for p in tree.players]
    return {"players": names, "root": _node_to_json(tree.root, names)}


def _node_from_json(data: Any, index: dict[str, int], where: str) -> Node:
    if not isinstance(data, dict):
        raise ParseError(f"{where}: expected an object")
    if "utility" in data:
        extra = set(data) - {"utility"}
        if extra:
            raise ParseError(f"{where}: unexpected keys {sorted(extra)} on a leaf")
        utils = data["utility"]
        if not isinstance(utils, list):
            raise ParseError(f"{where}.utility: expected a list")
        if len(utils) != len(index):
            raise ParseError(f"{where}.utility: leaf arity {len(utils)} for {len(index)} players")
        return Leaf(tuple(UtilityValue.from_json(u, f"{where}.utility[{i}]")
                          for i, u in enumerate(utils)))
    if "player" not in data or "children" not in data:
        raise ParseError(f"{where}: a node needs either 'utility' or both 'player' and 'children'")
    extra = set(data) - {"player", "children"}
    if extra:
        raise ParseError(f"{where}: unexpected keys {sorted(extra)}")
    owner = data["player"]
    if owner not in index:
        raise ParseError(f"{where}.player: unknown player {owner!r}")
    children = data["children"]
    if not isinstance(children, dict) or not children:
        raise ParseError(f"{where}.children: expected a nonempty object")
    pairs = []
    for label, child in children.items():
        if not label:
            raise ParseError(f"{where}.children: empty action label")
        if "," in label:
            raise ParseError(f"{where}.children: label {label!r} contains ','")
        pairs.append((label, _node_from_json(child, index, f"{where}.children[{label!r}]")))
    return Internal(index[owner], tuple(pairs))


def game_from_json(data: Any) -> Union[GameTree, NormalFormGame]:
    if not isinstance(data, dict):
        raise ParseError("top level: expected an object")
    players = data.get("players")
    if not isinstance(players, list) or not players or not all(isinstance(p, str) and p for p in players):
        raise ParseError("players: expected a nonempty list of player names")
    if len(set(players)) != len(players):
        raise ParseError("players: names must be unique")
    index = {name: i for i, name in enumerate(players)}
    if "root" in data:
        extra = set(data) - {"players", "root"}
        if extra:
            raise ParseError(f"top level: unexpected keys {sorted(extra)}")
        return GameTree(tuple(Player(i, n) for i, n in enumerate(players)),
                        _node_from_json(data["root"], index, "root"))
    if "strategies" in data and "payoffs" in data:
        return _nfg_from_json(data, players)
    raise ParseError("top level: expected 'root' (tree) or 'strategies' and 'payoffs' (normal form)")


# ---------------------------------------------------------------- normal form

def nfg_to_json(nfg: NormalFormGame) -> dict[str, Any]:
    return {
        "players": [p.name for p in nfg.players],
        "strategies": [list(s) for s in nfg.strategy_labels],
        "payoffs": [{"profile": list(nfg.labels_of(prof)),
                     "utility": [u.to_json() for u in nfg.utility(prof)]}
                    for prof in nfg.profiles()],
    }


def _nfg_from_json(data: dict[str, Any], players: list[str]) -> NormalFormGame:
    strategies = data["strategies"]
    if not isinstance(strategies, list) or len(strategies) != len(players):
        raise ParseError("strategies: expected one label list per player")
    labels = []
    for i, s in enumerate(strategies):
        if not isinstance(s, list) or not s or not all(isinstance(x, str) and x for x in s):
            raise ParseError(f"strategies[{i}]: expected a nonempty list of labels")
        if len(set(s)) != len(s):
            raise ParseError(f"strategies[{i}]: duplicate labels")
        labels.append(tuple(s))
    pl = tuple(Player(i, n) for i, n in enumerate(players))
    shell = NormalFormGame(pl, tuple(labels), {})
    payoffs = {}
    entries = data["payoffs"]
    if not isinstance(entries, list):
        raise ParseError("payoffs: expected a list")
    for k, entry in enumerate(entries):
        where = f"payoffs[{k}]"
        if not isinstance(entry, dict) or set(entry) != {"profile", "utility"}:
            raise ParseError(f"{where}: expected keys 'profile' and 'utility'")
        try:
            prof = shell.index_of(entry["profile"])
        except Exception as exc:
            raise ParseError(f"{where}.profile: {exc}") from None
        if prof in payoffs:
            raise ParseError(f"{where}: duplicate profile {entry['profile']}")
        utils = entry["utility"]
        if not isinstance(utils, list) or len(utils) != len(players):
            raise ParseError(f"{where}.utility: expected {len(players)} values")
        payoffs[prof] = tuple(UtilityValue.from_json(u, f"{where}.utility[{i}]")
                              for i, u in enumerate(utils))
    nfg = NormalFormGame(pl, tuple(labels), payoffs)
    problems = nfg.defects()
    if problems:
        raise ParseError("payoffs: " + "; ".join(problems))
    return nfg


def serialize_game(game: Union[GameTree, NormalFormGame]) -> str:
    if isinstance(game, GameTree):
        return dumps(game_to_json(game))
    return dumps(nfg_to_json(game))


def parse_game(text: str) -> Union[GameTree, NormalFormGame]:
    return game_from_json(loads_json(text))
