"""Builders for the closing and routing games and the small fixture games.

Utilities are measured relative to what each player is owed under the
latest channel state.  ``alpha`` is the benefit of a closed channel,
``eps`` the cost of waiting and ``rho`` the benefit of a fair update.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

from .errors import InvalidParams
from .game import (GameTree, History, Internal, Leaf, Node, NormalFormGame,
                   Player, internal, iter_nodes, leaf)
from .utility import ALPHA, EPS, RHO, ZERO, UtilityValue

A, B = 0, 1

# children are listed in this order wherever they occur
ACTION_ORDER = ("H", "D", "C_h", "C_c", "S", "I", "P", "U+", "U-", "A")


class ClosingVariant(enum.Enum):
    FULL = "FULL"
    NO_UPDATES = "NO_UPDATES"
    EDGE_A_ZERO = "EDGE_A_ZERO"
    EDGE_B_ZERO = "EDGE_B_ZERO"
    PHASE_WRAPPER = "PHASE_WRAPPER"


@dataclass(frozen=True)
class ClosingParams:
    """Channel state ``(a, b)``, fee ``f`` and the fixed deviation amounts.

    Amounts a variant does not use may be left as ``None``.
    """
    a: Fraction
    b: Fraction
    f: Fraction
    d_A: Optional[Fraction] = None
    d_B: Optional[Fraction] = None
    p_A: Optional[Fraction] = None
    p_B: Optional[Fraction] = None
    c: Optional[Fraction] = None

    def __post_init__(self) -> None:
        for fld in fields(self):
            v = getattr(self, fld.name)
            if v is None:
                continue
            if isinstance(v, float):
                raise InvalidParams(f"{fld.name}: floats are not accepted")
            object.__setattr__(self, fld.name, Fraction(v))

    def swapped(self) -> "ClosingParams":
        """The same channel seen from B's side."""
        return ClosingParams(self.b, self.a, self.f, self.d_B, self.d_A, self.p_B, self.p_A, self.c)


_NEEDED = {
    ClosingVariant.FULL: ("d_A", "d_B", "p_A", "p_B", "c"),
    ClosingVariant.NO_UPDATES: ("d_A", "d_B", "c"),
    ClosingVariant.EDGE_A_ZERO: ("d_A", "c"),
    ClosingVariant.EDGE_B_ZERO: ("d_B",),
    ClosingVariant.PHASE_WRAPPER: ("d_A", "d_B", "p_A", "p_B", "c"),
}


def _in_range(name: str, value: Optional[Fraction], upper: Fraction, upper_name: str) -> None:
    if value is None:
        raise InvalidParams(f"{name} is required for this variant")
    if not (0 < value <= upper):
        raise InvalidParams(f"{name}={value} must lie in (0, {upper_name}] = (0, {upper}]")


def validate_closing_params(params: ClosingParams, variant: ClosingVariant) -> None:
    a, b, f = params.a, params.b, params.f
    if a < 0 or b < 0:
        raise InvalidParams(f"balances must be non-negative (a={a}, b={b})")
    if f <= 0:
        raise InvalidParams(f"fee f={f} must be positive")
    if variant is ClosingVariant.EDGE_A_ZERO:
        if a != 0 or b <= 0:
            raise InvalidParams("EDGE_A_ZERO requires a = 0 and b > 0")
    elif variant is ClosingVariant.EDGE_B_ZERO:
        if b != 0 or a <= 0:
            raise InvalidParams("EDGE_B_ZERO requires b = 0 and a > 0")
    elif a <= 0 or b <= 0:
        raise InvalidParams(f"{variant.value} requires a > 0 and b > 0; use an edge-case variant")
    needed = _NEEDED[variant]
    for name, upper_name in (("d_A", "b"), ("p_A", "b"), ("c", "b"), ("d_B", "a"), ("p_B", "a")):
        if name in needed:
            _in_range(name, getattr(params, name), getattr(params, upper_name), upper_name)
    if variant is ClosingVariant.PHASE_WRAPPER:
        # c is also B's cheating margin in the mirrored game
        _in_range("c", params.c, a, "a")


def _node(player: int, children: Mapping[str, Node]) -> Internal:
    order = {lab: i for i, lab in enumerate(ACTION_ORDER)}
    pairs = sorted(children.items(), key=lambda kv: order.get(kv[0], len(order)))
    return internal(player, pairs)


def _pair(u_a: object, u_b: object) -> Leaf:
    return leaf(u_a, u_b)


class _ClosingBuilder:
    def __init__(self, p: ClosingParams, updates: bool):
        self.p = p
        self.updates = updates

    # reactions to a unilateral dishonest close, optionally after an update
    def b_reacts_to_a_cheat(self, shift: UtilityValue = ZERO, bonus: UtilityValue = ZERO) -> Internal:
        a, f, d_A = self.p.a, self.p.f, self.p.d_A
        return _node(B, {
            "P": _pair(-a + shift + bonus, a - shift - f + bonus + ALPHA),
            "I": _pair(d_A + bonus + ALPHA - EPS, -d_A + bonus + ALPHA),
        })

    def a_reacts_to_b_cheat(self, shift: UtilityValue = ZERO, bonus: UtilityValue = ZERO) -> Internal:
        b, f, d_B = self.p.b, self.p.f, self.p.d_B
        return _node(A, {
            "P": _pair(b + shift - f + bonus + ALPHA, -b - shift + bonus),
            "I": _pair(-d_B + bonus + ALPHA, d_B + bonus + ALPHA - EPS),
        })

    def sign_leaf(self, margin: Fraction, shift: UtilityValue = ZERO, bonus: UtilityValue = ZERO) -> Leaf:
        return _pair(margin + shift + bonus + ALPHA, -margin - shift + bonus + ALPHA)

    def both_idle(self, shift: UtilityValue = ZERO, bonus: UtilityValue = ZERO) -> Leaf:
        return _pair(-self.p.a + shift + bonus, -self.p.b - shift + bonus)

    def a_after_b_ignores(self, margin: Fraction) -> Internal:
        """A to move after B ignored A's collaborative attempt."""
        kids: dict[str, Node] = {
            "H": _pair(ALPHA - EPS, ALPHA),
            "D": self.b_reacts_to_a_cheat(),
            "I": self.both_idle(),
        }
        if self.updates:
            kids["U+"] = self.b_moves_first_update(margin, -self.p.p_A)
            kids["U-"] = self.b_moves_first_update(margin, +self.p.p_B)
        return _node(A, kids)

    def b_answers_collab(self, margin: Fraction) -> Internal:
        """B to move after A's collaborative attempt with cheating margin ``margin``."""
        kids: dict[str, Node] = {
            "S": self.sign_leaf(margin),
            "H": _pair(ALPHA, ALPHA - EPS),
            "I": self.a_after_b_ignores(margin),
            "D": self.a_reacts_to_b_cheat(),
        }
        if self.updates:
            kids["U+"] = self.a_moves_first_update(margin, -self.p.p_A)
            kids["U-"] = self.a_moves_first_update(margin, +self.p.p_B)
        return _node(B, kids)

    def _agreed(self, margin: Fraction, shift: Fraction, first: int) -> Internal:
        """Play on the updated state once the proposal is agreed; ``first`` moves next."""
        s, r = UtilityValue.of(shift), RHO
        b_side = _node(B, {
            "S": self.sign_leaf(margin, s, r),
            "H": _pair(r + ALPHA, r + ALPHA - EPS),
            "I": self.both_idle(s, r),
            "D": self.a_reacts_to_b_cheat(s, r),
        })
        if first == A:
            return _node(A, {
                "H": _pair(r + ALPHA - EPS, r + ALPHA),
                "D": self.b_reacts_to_a_cheat(s, r),
                "I": b_side,
            })
        return _node(B, {
            "S": self.sign_leaf(margin, s, r),
            "H": _pair(r + ALPHA, r + ALPHA - EPS),
            "D": self.a_reacts_to_b_cheat(s, r),
            "I": _node(A, {
                "H": _pair(r + ALPHA - EPS, r + ALPHA),
                "D": self.b_reacts_to_a_cheat(s, r),
                "I": self.both_idle(s, r),
            }),
        })

    def b_moves_first_update(self, margin: Fraction, shift: Fraction) -> Internal:
        """Update proposed by A after B ignored her attempt; B answers."""
        return _node(B, {
            "H": _pair(ALPHA, ALPHA - EPS),
            "S": self.sign_leaf(margin),
            "I": _node(A, {
                "I": self.both_idle(),
                "H": _pair(ALPHA - EPS, ALPHA),
                "D": self.b_reacts_to_a_cheat(),
            }),
            "D": self.a_reacts_to_b_cheat(),
            "A": self._agreed(margin, shift, first=A),
        })

    def a_moves_first_update(self, margin: Fraction, shift: Fraction) -> Internal:
        """Update proposed by B in reply to A's attempt; A answers."""
        return _node(A, {
            "H": _pair(ALPHA - EPS, ALPHA),
            "D": self.b_reacts_to_a_cheat(),
            "I": _node(B, {
                "I": self.both_idle(),
                "S": self.sign_leaf(margin),
                "H": _pair(ALPHA, ALPHA - EPS),
                "D": self.a_reacts_to_b_cheat(),
            }),
            "A": self._agreed(margin, shift, first=B),
        })

    def root(self) -> Internal:
        return _node(A, {
            "H": _pair(ALPHA - EPS, ALPHA),
            "D": self.b_reacts_to_a_cheat(),
            "C_h": self.b_answers_collab(Fraction(0)),
            "C_c": self.b_answers_collab(self.p.c),
        })


def _edge_a_zero(p: ClosingParams) -> Internal:
    b, f, d_A, c = p.b, p.f, p.d_A, p.c
    react = lambda: _node(B, {"P": _pair(0, -f + ALPHA), "I": _pair(d_A + ALPHA - EPS, -d_A + ALPHA)})
    after_ignore = lambda: _node(A, {"H": _pair(0, ALPHA), "D": react(), "I": _pair(0, -b)})
    return _node(A, {
        "H": _pair(0, ALPHA),
        "D": react(),
        "C_h": _node(B, {"S": _pair(0, ALPHA), "H": _pair(0, ALPHA - EPS), "I": after_ignore()}),
        "C_c": _node(B, {"S": _pair(c + ALPHA, -c + ALPHA), "H": _pair(0, ALPHA - EPS),
                         "I": after_ignore()}),
    })


def _edge_b_zero(p: ClosingParams) -> Internal:
    a, f, d_B = p.a, p.f, p.d_B
    return _node(A, {
        "H": _pair(ALPHA - EPS, 0),
        "C_h": _node(B, {
            "S": _pair(ALPHA, 0),
            "H": _pair(ALPHA, 0),
            "I": _node(A, {"H": _pair(ALPHA - EPS, 0), "I": _pair(-a, 0)}),
            "D": _node(A, {"P": _pair(-f + ALPHA, 0), "I": _pair(-d_B + ALPHA, d_B + ALPHA - EPS)}),
        }),
    })


def _mirror(node: Node) -> Node:
    """Swap the two players' roles: owners exchanged, utility vectors reversed."""
    if isinstance(node, Leaf):
        return Leaf(tuple(reversed(node.utilities)))
    return Internal(1 - node.player, tuple((a, _mirror(c)) for a, c in node.actions))


PHASE_START = "close"
PHASE_WAIT = "wait"


def build_closing_game(params: ClosingParams,
                       variant: ClosingVariant = ClosingVariant.FULL) -> GameTree:
    validate_closing_params(params, variant)
    if variant is ClosingVariant.EDGE_A_ZERO:
        root: Node = _edge_a_zero(params)
    elif variant is ClosingVariant.EDGE_B_ZERO:
        root = _edge_b_zero(params)
    elif variant is ClosingVariant.PHASE_WRAPPER:
        game_a = _ClosingBuilder(params, updates=True).root()
        game_b = _mirror(_ClosingBuilder(params.swapped(), updates=True).root())
        root = internal(A, [
            (PHASE_START, game_a),
            (PHASE_WAIT, internal(B, [(PHASE_START, game_b),
                                      (PHASE_WAIT, _pair(-params.a, -params.b))])),
        ])
    else:
        root = _ClosingBuilder(params, updates=variant is ClosingVariant.FULL).root()
    return GameTree((Player(A, "A"), Player(B, "B")), root)


def mirrored_closing_game(params: ClosingParams) -> GameTree:
    """B's closing game: A's game on the swapped channel with the players exchanged."""
    base = build_closing_game(params.swapped(), ClosingVariant.FULL)
    return GameTree(base.players, _mirror(base.root))


def honest_histories(tree: GameTree) -> list[History]:
    """Terminal histories avoiding the cheating actions ``C_c`` and ``D``."""
    return [p for p, n in iter_nodes(tree.root)
            if isinstance(n, Leaf) and "C_c" not in p and "D" not in p]


# ---------------------------------------------------------------- routing

class RoutingKind(enum.Enum):
    PRIOR = "PRIOR"
    REFINED = "REFINED"


@dataclass(frozen=True)
class RoutingParams:
    m: Fraction
    f: Fraction

    def __post_init__(self) -> None:
        for name in ("m", "f"):
            v = getattr(self, name)
            if isinstance(v, float):
                raise InvalidParams(f"{name}: floats are not accepted")
            object.__setattr__(self, name, Fraction(v))


ROUTING_PLAYERS = ("A", "E1", "I", "E2", "B")
# owners along the honest chain, root first
_CHAIN = ("B", "A", "E1", "I", "E2", "B", "E2", "I", "E1")
# chain positions where the unspecified "other" action may be grafted
ROUTING_GRAFT_POINTS: tuple[History, ...] = tuple(("H",) * k for k in (0, 1, 2, 3, 4, 5, 7, 8)) + (
    ("H",) * 6 + ("D",),)
OTHER_ACTION = "O"

Grafts = Union[Mapping[History, Node], Callable[[History], Optional[Node]]]


def build_routing_game(kind: RoutingKind, params: Optional[RoutingParams] = None,
                       grafts: Optional[Grafts] = None) -> GameTree:
    """Three-intermediary routing game, players (A, E1, I, E2, B).

    ``grafts`` optionally supplies subtrees reached by an extra action
    ``"O"`` at the points listed in :data:`ROUTING_GRAFT_POINTS`.
    """
    idx = {n: i for i, n in enumerate(ROUTING_PLAYERS)}
    zeros = leaf(*([0] * 5))
    if kind is RoutingKind.PRIOR:
        tail: Node = internal(idx["E1"], [("H", leaf(1, 1, 1, 1, 1)), ("I", leaf(1, -1, 1, 1, 1))])
        tail = internal(idx["I"], [("H", tail), ("I", leaf(0, 0, -1, 1, 1))])
        tail = internal(idx["E2"], [("H", tail), ("I", leaf(0, 0, 0, -1, 1))])
        wormhole = None
    else:
        if params is None:
            raise InvalidParams("the refined routing game needs m and f")
        m, f = params.m, params.f
        if m <= 0 or f <= 0:
            raise InvalidParams(f"m={m} and f={f} must be positive")
        unpaid = m + 3 * f + RHO
        tail = internal(idx["E1"], [("H", leaf(RHO, f, f, f, RHO)),
                                    ("I", leaf(unpaid, -m - 2 * f, f, f, RHO))])
        tail = internal(idx["I"], [("H", tail), ("I", leaf(unpaid, 0, -m - f, f, RHO))])
        wormhole = internal(idx["E1"], [("D", leaf(RHO, m + 3 * f, 0, -m, RHO)),
                                        ("I", leaf(unpaid, 0, 0, -m, RHO))])
        tail = internal(idx["E2"], [("H", tail), ("D", wormhole), ("I", leaf(unpaid, 0, 0, -m, RHO))])
    for owner in reversed(_CHAIN[:6]):
        tail = internal(idx[owner], [("H", tail), ("I", zeros)])
    tree = GameTree.build(ROUTING_PLAYERS, tail)
    if grafts:
        if not callable(grafts):
            unknown = [list(k) for k in grafts if tuple(k) not in ROUTING_GRAFT_POINTS]
            if unknown:
                raise InvalidParams(f"no 'other' action is foreseen at {unknown[0]}")
        tree = GameTree(tree.players, _graft(tree.root, (), grafts))
    return tree


def _graft(node: Node, path: History, grafts: Grafts) -> Node:
    if isinstance(node, Leaf):
        return node
    kids = [(a, _graft(c, path + (a,), grafts)) for a, c in node.actions]
    extra = grafts(path) if callable(grafts) else grafts.get(path)
    if extra is not None:
        if path not in ROUTING_GRAFT_POINTS:
            raise InvalidParams(f"no 'other' action is foreseen at {list(path)}")
        kids.append((OTHER_ACTION, extra))
    return Internal(node.player, tuple(kids))


def routing_honest_strategy(tree: GameTree) -> dict[History, str]:
    """Everyone plays H; the node reached only by E2's D is resolved with I."""
    out = {}
    for path, node in iter_nodes(tree.root):
        if isinstance(node, Internal):
            out[path] = "H" if "H" in node.labels else "I"
    return out


# ---------------------------------------------------------------- fixtures

def _nfg(players: Sequence[str], strategies: Sequence[Sequence[str]],
         table: Mapping[tuple[str, ...], Sequence[int]]) -> NormalFormGame:
    pl = tuple(Player(i, n) for i, n in enumerate(players))
    labels = tuple(tuple(s) for s in strategies)
    payoffs = {}
    for prof_labels, utils in table.items():
        prof = tuple(labels[p].index(l) for p, l in enumerate(prof_labels))
        payoffs[prof] = tuple(UtilityValue.of(u) for u in utils)
    return NormalFormGame(pl, labels, payoffs)


def _gamma12(deviation_gain: int) -> NormalFormGame:
    return _nfg(("p1", "p2", "p3"), (("H1", "D1"), ("H2",), ("H3", "D3")), {
        ("H1", "H2", "H3"): (1, 1, 1),
        ("H1", "H2", "D3"): (1, 1, 1),
        ("D1", "H2", "H3"): (1, 1, 1),
        ("D1", "H2", "D3"): (deviation_gain, 0, -2),
    })


def builtin_fixture(name: str) -> Union[NormalFormGame, GameTree]:
    key = name.upper().replace("-", "_")
    if key == "GAMMA1":
        return _gamma12(5)
    if key == "GAMMA2":
        return _gamma12(3)
    if key == "GAMMA3":
        return _nfg(("p1", "p2"), (("H1", "D1"), ("H2", "D2")), {
            ("H1", "H2"): (1, 1), ("H1", "D2"): (1, 1),
            ("D1", "H2"): (1, 1), ("D1", "D2"): (2, 2),
        })
    if key == "GAMMA_E":
        deepest = internal(B, [("7", leaf(0, 1)), ("8", leaf(0, 2))])
        inner = internal(A, [("5", leaf(1, 1)), ("6", deepest)])
        mid = internal(B, [("3", leaf(3, 1)), ("4", inner)])
        return GameTree.build(("A", "B"), internal(A, [("1", leaf(2, 2)), ("2", mid)]))
    raise KeyError(f"unknown fixture {name!r}; choose GAMMA1, GAMMA2, GAMMA3 or GAMMA_E")


FIXTURES = ("GAMMA1", "GAMMA2", "GAMMA3", "GAMMA_E")


# ---------------------------------------------------------------- advice

class Role(enum.Enum):
    INITIATOR = "INITIATOR"
    REACTOR = "REACTOR"


@dataclass(frozen=True)
class OldState:
    """A revoked channel state that pays ``beneficiary`` ``d`` more than the latest one."""
    d: Fraction
    beneficiary: str  # "A" or "B"


@dataclass(frozen=True)
class Advice:
    action: str
    recommendation: str
    rationale: str

    def __str__(self) -> str:
        return f"{self.recommendation}\n  because {self.rationale}"


def closing_advice(params: ClosingParams, old_states: Sequence[OldState], role: Role,
                   situation: Optional[str] = None, observed_gain: Optional[Fraction] = None) -> Advice:
    """Recommended closing move.

    The player giving advice is A when initiating and B when reacting.
    ``situation`` is the opponent's last action (``"C_h"``, ``"C_c"``,
    ``"D"``, ``"I"``) or ``None``; for ``"D"`` the cheater's gain
    ``observed_gain`` is needed.
    """
    a, b, f = params.a, params.b, params.f
    if a < 0 or b < 0 or f <= 0:
        raise InvalidParams("need a, b >= 0 and f > 0")
    for st in old_states:
        if st.beneficiary not in ("A", "B"):
            raise InvalidParams(f"old state beneficiary must be A or B, got {st.beneficiary!r}")
        cap, cap_name = (b, "b") if st.beneficiary == "A" else (a, "a")
        if not (0 < st.d <= cap):
            raise InvalidParams(f"old state gain {st.d} for {st.beneficiary} outside (0, {cap_name}]")
    gains_a = [st.d for st in old_states if st.beneficiary == "A"]
    gains_b = [st.d for st in old_states if st.beneficiary == "B"]

    if role is Role.INITIATOR:
        if situation == "I":
            return Advice("H", "honest unilateral close (H)",
                          "the collaborative attempt was not signed")
        if situation not in (None, "S"):
            raise InvalidParams(f"an initiator does not react to {situation!r}")
        if situation == "S":
            return Advice("-", "nothing to do", "the collaborative close was signed")
        usable = [d for d in gains_a if a + d < f]
        if a >= f:
            return Advice("C_h", "collaborative honest close (C_h)", f"a={a} >= f={f}")
        if not usable:
            return Advice("C_h", "collaborative honest close (C_h)",
                          f"a={a} < f={f} but no earlier state left A below f")
        d = max(usable)
        return Advice("D", f"dishonest unilateral close (D) with the old state d_A={d}",
                      f"a={a} < f={f} and a+d_A={a + d} < f, so a revocation is not worth B's fee")

    if situation == "C_h":
        risky = [d for d in gains_b if b + d < f]
        if b < f and risky:
            d = max(risky)
            return Advice("D", f"may risk dishonest unilateral close (D) with the old state d_B={d}",
                          f"funds b={b} are below f={f} and even the old state gives b+d_B={b + d} < f")
        return Advice("S", "sign (S)", "honest collaborative attempt")
    if situation == "C_c":
        note = ""
        if b < f and gains_b:
            note = "; with funds this low a dishonest unilateral close (D) can be considered"
        return Advice("H", "honest unilateral close (H)", "the proposed split cheats" + note)
    if situation == "D":
        if observed_gain is None:
            raise InvalidParams("reacting to D needs the cheater's gain d_A")
        total = a + Fraction(observed_gain)
        if total >= f:
            return Advice("P", "publish revocation (P)", f"a+d_A={total} >= f={f}")
        return Advice("I", "ignore (I)", f"a+d_A={total} < f={f}: punishing costs more than it recovers")
    if situation in (None, "H", "I"):
        return Advice("-", "nothing to do", "no closing attempt to react to")
    raise InvalidParams(f"unknown situation {situation!r}")
