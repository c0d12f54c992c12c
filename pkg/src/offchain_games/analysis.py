"""Property checkers for strategies and terminal histories.

Every check quantifying over deviations is answered by walking the leaves
that remain reachable when only the deviating players are free
(:func:`reachable_leaves`), never by enumerating opponent strategies.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Optional, Sequence, Union

from .errors import EmptyStrategySet, NoSuchHistory
from .fileformat import strategy_to_json
from .game import (GameTree, History, Internal, JointStrategy, Leaf, Node,
                   NormalFormGame, Player, Restriction, Utilities,
                   internal_nodes, node_at, outcome, play_out,
                   reachable_leaves, require_terminal)
from .utility import ZERO, UtilityValue, usum


class Property(enum.Enum):
    WEAK_IMMUNE = "WEAK_IMMUNE"
    NASH = "NASH"
    SR = "SR"
    SR_SUBSETEQ = "SR_SUBSETEQ"
    SNE = "SNE"
    CR = "CR"
    PRACTICAL = "PRACTICAL"
    SECURE = "SECURE"


COALITION_PROPERTIES = (Property.NASH, Property.SR, Property.SR_SUBSETEQ,
                        Property.SNE, Property.CR)


class Verdict(enum.Enum):
    HOLDS = "HOLDS"
    FAILS = "FAILS"
    HOLDS_WITH_WITNESS = "HOLDS_WITH_WITNESS"


@dataclass(frozen=True)
class Counterexample:
    """A deviation breaking a property.

    For weak immunity ``lhs`` is the victim's utility and ``rhs`` is zero
    (violation: lhs < rhs).  For the coalition properties the violation is
    lhs > rhs: a member's utility (SR, SR_SUBSETEQ, NASH, practicality), the
    coalition's summed utility (CR), or for SNE the utility of the
    lowest-indexed member, every member gaining.
    """
    coalition: tuple[Player, ...]
    deviation_leaf: History
    violating_player: Optional[Player]
    lhs: UtilityValue
    rhs: UtilityValue

    def to_json(self) -> dict[str, Any]:
        return {
            "coalition": [p.name for p in self.coalition],
            "deviation_leaf": list(self.deviation_leaf),
            "violating_player": self.violating_player.name if self.violating_player else None,
            "lhs": self.lhs.to_json(),
            "rhs": self.rhs.to_json(),
        }


@dataclass(frozen=True)
class PropertyReport:
    property: Property
    subject_kind: str  # "history", "strategy" or "profile"
    subject: Any
    verdict: Verdict
    witness: Optional[JointStrategy] = None
    counterexample: Optional[Counterexample] = None
    counterexamples: tuple[Counterexample, ...] = ()
    sub_reports: tuple["PropertyReport", ...] = ()
    detail: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict is not Verdict.FAILS

    def sub(self, prop: Property) -> "PropertyReport":
        for r in self.sub_reports:
            if r.property is prop:
                return r
        raise KeyError(prop)

    def to_json(self) -> dict[str, Any]:
        if self.subject_kind == "strategy":
            subject: Any = strategy_to_json(self.subject)
        else:
            subject = list(self.subject)
        out: dict[str, Any] = {
            "property": self.property.value,
            "subject": {self.subject_kind: subject},
            "verdict": self.verdict.value,
        }
        if self.witness is not None:
            out["witness"] = strategy_to_json(self.witness)
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample.to_json()
        if len(self.counterexamples) > 1:
            out["counterexamples"] = [c.to_json() for c in self.counterexamples]
        if self.sub_reports:
            out["sub_reports"] = [r.to_json() for r in self.sub_reports]
        if self.detail:
            out["detail"] = self.detail
        return out


def _report(prop: Property, kind: str, subject: Any, cexs: Sequence[Counterexample],
            witness: Optional[JointStrategy] = None, detail: str = "") -> PropertyReport:
    if cexs:
        return PropertyReport(prop, kind, subject, Verdict.FAILS, None, cexs[0], tuple(cexs),
                              detail=detail)
    verdict = Verdict.HOLDS if witness is None else Verdict.HOLDS_WITH_WITNESS
    return PropertyReport(prop, kind, subject, verdict, witness, detail=detail)


# ---------------------------------------------------------------- coalitions

def coalitions(n_players: int, prop: Property) -> list[frozenset[int]]:
    """Coalitions quantified over by ``prop``, ordered by size then members."""
    everyone = range(n_players)
    if prop is Property.NASH:
        sizes = [1]
    elif prop in (Property.SR, Property.CR):
        sizes = list(range(1, n_players))
    elif prop in (Property.SR_SUBSETEQ, Property.SNE):
        sizes = list(range(1, n_players + 1))
    else:
        raise ValueError(f"{prop.value} is not a coalition property")
    return [frozenset(c) for k in sizes for c in itertools.combinations(everyone, k)]


def violation(prop: Property, coalition: Iterable[int], deviation: Utilities,
              base: Utilities) -> Optional[tuple[Optional[int], UtilityValue, UtilityValue]]:
    """Return (violating player, lhs, rhs) when ``deviation`` breaks ``prop`` for the coalition."""
    members = sorted(coalition)
    if prop in (Property.NASH, Property.SR, Property.SR_SUBSETEQ):
        for p in members:
            if deviation[p] > base[p]:
                return p, deviation[p], base[p]
        return None
    if prop is Property.CR:
        lhs = usum(deviation[p] for p in members)
        rhs = usum(base[p] for p in members)
        return (None, lhs, rhs) if lhs > rhs else None
    if prop is Property.SNE:
        if members and all(deviation[p] > base[p] for p in members):
            return None, deviation[members[0]], base[members[0]]
        return None
    raise ValueError(f"{prop.value} is not a coalition property")


# ---------------------------------------------------------------- strategy checks

def check_weak_immune(tree: GameTree, sigma: Mapping[History, str]) -> PropertyReport:
    """No player following ``sigma`` ends below zero, whatever the others do."""
    cexs = []
    n = tree.n_players
    for p in range(n):
        others = frozenset(range(n)) - {p}
        for hist, utils in reachable_leaves(tree, Restriction(others, sigma)):
            if utils[p] < ZERO:
                cexs.append(Counterexample(tuple(tree.players[q] for q in sorted(others)),
                                           hist, tree.players[p], utils[p], ZERO))
                break
    return _report(Property.WEAK_IMMUNE, "strategy", JointStrategy(sigma), cexs)


def check_resilience(tree: GameTree, sigma: Mapping[History, str], prop: Property,
                     only: Optional[Iterable[Iterable[int]]] = None) -> PropertyReport:
    """Definitional coalition check; one counterexample per violating coalition.

    ``only`` restricts the coalitions examined (they must be admissible for ``prop``).
    """
    base = outcome(tree, sigma)
    family = coalitions(tree.n_players, prop)
    if only is not None:
        wanted = {frozenset(c) for c in only}
        family = [c for c in family if c in wanted]
    cexs = []
    for coal in family:
        for hist, utils in reachable_leaves(tree, Restriction(coal, sigma)):
            v = violation(prop, coal, utils, base)
            if v is not None:
                who, lhs, rhs = v
                cexs.append(Counterexample(tuple(tree.players[q] for q in sorted(coal)), hist,
                                           None if who is None else tree.players[who], lhs, rhs))
                break
    return _report(prop, "strategy", JointStrategy(sigma), cexs)


def is_spe(tree: GameTree, sigma: Mapping[History, str]) -> PropertyReport:
    """Subgame perfection of a full strategy: a Nash equilibrium in every subgame."""
    cexs = []
    for path, node in internal_nodes(tree):
        base = outcome(tree, sigma, path)
        for q in range(tree.n_players):
            for hist, utils in reachable_leaves(tree, Restriction(frozenset({q}), sigma), path):
                if utils[q] > base[q]:
                    cexs.append(Counterexample((tree.players[q],), hist, tree.players[q],
                                               utils[q], base[q]))
                    break
            if cexs:
                break
        if cexs:
            break
    return _report(Property.PRACTICAL, "strategy", JointStrategy(sigma), cexs)


def check_secure_strategy(tree: GameTree, sigma: Mapping[History, str]) -> PropertyReport:
    subs = (check_weak_immune(tree, sigma), is_spe(tree, sigma),
            check_resilience(tree, sigma, Property.CR))
    verdict = Verdict.HOLDS if all(r.holds for r in subs) else Verdict.FAILS
    return PropertyReport(Property.SECURE, "strategy", JointStrategy(sigma), verdict,
                          sub_reports=subs)


# ---------------------------------------------------------------- subgame perfection

Outcome = tuple[History, Utilities]


def spe_outcomes(tree: GameTree) -> dict[History, list[Outcome]]:
    """Outcomes reachable by some subgame perfect strategy, for every node.

    A node's owner keeps every outcome of child ``j`` that is at least as
    good for them as the best worst-case of every other child; ties are
    kept as sets.
    """
    table: dict[History, list[Outcome]] = {}

    def visit(node: Node, path: History) -> list[Outcome]:
        if isinstance(node, Leaf):
            res = [(path, node.utilities)]
        else:
            p = node.player
            kids = [visit(c, path + (a,)) for a, c in node.actions]
            floors = [min(o[1][p] for o in outs) for outs in kids]
            res = []
            for j, outs in enumerate(kids):
                others = [f for k, f in enumerate(floors) if k != j]
                bar = max(others) if others else None
                res.extend(o for o in outs if bar is None or o[1][p] >= bar)
        table[path] = res
        return res

    visit(tree.root, ())
    return table


def spe_histories(tree: GameTree) -> list[History]:
    return [h for h, _ in spe_outcomes(tree)[()]]


def spe_strategy_for(tree: GameTree, target: History,
                     table: Optional[dict[History, list[Outcome]]] = None) -> JointStrategy:
    """A subgame perfect strategy whose play is ``target`` (which must be an SPE history)."""
    table = spe_outcomes(tree) if table is None else table
    if target not in {h for h, _ in table[()]}:
        raise ValueError(f"{list(target)} is not a subgame perfect history")
    choice: dict[History, str] = {}

    def realize(node: Node, path: History, goal: History) -> None:
        if isinstance(node, Leaf):
            return
        p = node.player
        chosen = goal[len(path)]
        choice[path] = chosen
        for a, c in node.actions:
            sub = path + (a,)
            if a == chosen:
                realize(c, sub, goal)
            else:
                worst = min(table[sub], key=lambda o: o[1][p])
                realize(c, sub, worst[0])

    realize(tree.root, (), target)
    return JointStrategy(choice)


def is_practical(tree: GameTree, beta: Sequence[str]) -> PropertyReport:
    beta = tuple(beta)
    base = require_terminal(tree, beta)
    table = spe_outcomes(tree)
    if any(h == beta for h, _ in table[()]):
        return _report(Property.PRACTICAL, "history", beta, [],
                       witness=spe_strategy_for(tree, beta, table))
    # deepest on-path node at which beta stops being subgame perfect
    for depth in range(len(beta) - 1, -1, -1):
        prefix = beta[:depth]
        if not any(h == beta for h, _ in table[prefix]):
            node = node_at(tree, prefix)
            assert isinstance(node, Internal)
            p = node.player
            best = None
            for a, _ in node.actions:
                if a == beta[depth]:
                    continue
                worst = min(table[prefix + (a,)], key=lambda o: o[1][p])
                if best is None or worst[1][p] > best[1][p]:
                    best = worst
            assert best is not None
            cex = Counterexample((tree.players[p],), best[0], tree.players[p],
                                 best[1][p], base[p])
            detail = (f"{tree.players[p].name} deviates at {list(prefix)}; "
                      f"subgame perfect histories: {[list(h) for h, _ in table[()]]}")
            return _report(Property.PRACTICAL, "history", beta, [cex], detail=detail)
    raise AssertionError("unreachable: leaf outcome sets always contain the leaf")


# ---------------------------------------------------------------- extension search

def _on_path(beta: History) -> list[History]:
    return [beta[:i] for i in range(len(beta))]


def _maximin(tree: GameTree, beta: History, p: int) -> tuple[UtilityValue, History, dict[History, str]]:
    """Best utility ``p`` can guarantee while following ``beta`` on path.

    Returns the value, a leaf where the adversaries hold ``p`` to it, and
    ``p``'s maximizing choices at all of its off-path nodes.
    """
    choices: dict[History, str] = {}

    def visit(node: Node, path: History) -> tuple[UtilityValue, History]:
        if isinstance(node, Leaf):
            return node.utilities[p], path
        depth = len(path)
        on_path = depth < len(beta) and path == beta[:depth]
        if on_path and node.player == p:
            label = beta[depth]
            return visit(node.child(label), path + (label,))
        results = [(a, visit(c, path + (a,))) for a, c in node.actions]
        if node.player == p:
            a, best = max(results, key=lambda r: r[1][0])  # first maximum wins
            choices[path] = a
            return best
        return min((r[1] for r in results), key=lambda v: v[0])

    value, where = visit(tree.root, ())
    return value, where, choices


def _find_weak_immune(tree: GameTree, beta: History) -> PropertyReport:
    witness: dict[History, str] = {path: beta[len(path)] for path in _on_path(beta)}
    cexs = []
    for p in range(tree.n_players):
        value, where, choices = _maximin(tree, beta, p)
        witness.update(choices)
        if value < ZERO:
            others = tuple(q for q in tree.players if q.id != p)
            cexs.append(Counterexample(others, where, tree.players[p], value, ZERO))
    if cexs:
        return _report(Property.WEAK_IMMUNE, "history", beta, cexs,
                       detail="some player cannot guarantee a non-negative utility")
    for path, node in internal_nodes(tree):
        witness.setdefault(path, node.labels[0])
    sigma = JointStrategy(witness)
    recheck = check_weak_immune(tree, sigma)
    assert recheck.holds, f"weak immunity witness failed its own check: {recheck.to_json()}"
    return _report(Property.WEAK_IMMUNE, "history", beta, [], witness=sigma)


def _antichain(options: list[tuple[int, dict[History, str]]]) -> list[tuple[int, dict[History, str]]]:
    """Keep only masks not contained in another mask (first representative wins)."""
    kept: list[tuple[int, dict[History, str]]] = []
    for mask, assign in sorted(options, key=lambda o: -bin(o[0]).count("1")):
        if any(mask & m == mask for m, _ in kept):
            continue
        kept.append((mask, assign))
    return kept


def _subtree_options(node: Node, path: History, family: list[frozenset[int]],
                     prop: Property, base: Utilities) -> list[tuple[int, dict[History, str]]]:
    """Achievable sets of satisfied coalitions for a deviation subtree.

    Bit ``k`` of a mask is set when no leaf the coalition ``family[k]`` can
    reach in this subtree violates ``prop``.  A coalition containing the
    owner of a node reaches all its children; any other coalition follows
    the assigned action.  Returns the maximal masks with an assignment of
    every internal node in the subtree realizing each.
    """
    if isinstance(node, Leaf):
        mask = 0
        for k, coal in enumerate(family):
            if violation(prop, coal, node.utilities, base) is None:
                mask |= 1 << k
        return [(mask, {})]
    full = (1 << len(family)) - 1
    inside = sum(1 << k for k, coal in enumerate(family) if node.player in coal)
    outside = full & ~inside
    kids = [(a, _subtree_options(c, path + (a,), family, prop, base)) for a, c in node.actions]
    projected = [_antichain([(m & inside, asg) for m, asg in opts]) for _, opts in kids]
    results: list[tuple[int, dict[History, str]]] = []
    for j, (label, opts) in enumerate(kids):
        acc: list[tuple[int, dict[History, str]]] = [(inside, {})]
        for i, proj in enumerate(projected):
            if i == j:
                continue
            acc = _antichain([(m1 & m2, {**a1, **a2}) for m1, a1 in acc for m2, a2 in proj])
        for m_acc, a_acc in acc:
            for m_j, a_j in opts:
                mask = (m_acc & m_j & inside) | (m_j & outside)
                results.append((mask, {path: label, **a_acc, **a_j}))
    return _antichain(results)


def _find_coalitional(tree: GameTree, beta: History, prop: Property) -> PropertyReport:
    base = require_terminal(tree, beta)
    all_coals = coalitions(tree.n_players, prop)
    witness: dict[History, str] = {path: beta[len(path)] for path in _on_path(beta)}
    failures = []
    for path in _on_path(beta):
        node = node_at(tree, path)
        assert isinstance(node, Internal)
        family = [c for c in all_coals if node.player in c]
        full = (1 << len(family)) - 1
        for a, child in node.actions:
            if a == beta[len(path)]:
                continue
            options = _subtree_options(child, path + (a,), family, prop, base)
            best_mask, best_assign = options[0]
            for m, asg in options:
                if m == full:
                    best_mask, best_assign = m, asg
                    break
            witness.update(best_assign)
            if best_mask != full:
                failures.append((path + (a,), node.player, family, best_mask))
    for path, node in internal_nodes(tree):
        witness.setdefault(path, node.labels[0])
    sigma = JointStrategy(witness)
    recheck = check_resilience(tree, sigma, prop)
    if failures:
        assert not recheck.holds, "extension search reported failure but its best effort passes"
        lines = []
        for sub, owner, family, mask in failures:
            lost = [tree.names(sorted(c)) for k, c in enumerate(family) if not mask >> k & 1]
            lines.append(f"after {list(sub)} (deviation by {tree.players[owner].name}) "
                         f"no assignment protects against {lost}")
        detail = "no extension exists: " + "; ".join(lines) + \
                 ". Counterexamples are for the closest extension found."
        return _report(prop, "history", beta, list(recheck.counterexamples), detail=detail)
    assert recheck.holds, f"extension witness failed its own check: {recheck.to_json()}"
    return _report(prop, "history", beta, [], witness=sigma)


def find_extension(tree: GameTree, beta: Sequence[str], prop: Property) -> PropertyReport:
    """Search for a full strategy that plays ``beta`` and satisfies ``prop``."""
    beta = tuple(beta)
    require_terminal(tree, beta)
    if prop is Property.WEAK_IMMUNE:
        return _find_weak_immune(tree, beta)
    if prop in COALITION_PROPERTIES:
        return _find_coalitional(tree, beta, prop)
    raise ValueError(f"find_extension does not handle {prop.value}")


def check_history(tree: GameTree, beta: Sequence[str], prop: Property) -> PropertyReport:
    """Dispatch a history check to the right procedure for ``prop``."""
    if prop is Property.PRACTICAL:
        return is_practical(tree, beta)
    if prop is Property.SECURE:
        return check_secure(tree, beta)
    return find_extension(tree, beta, prop)


def check_secure(tree: GameTree, beta: Sequence[str]) -> PropertyReport:
    beta = tuple(beta)
    subs = (find_extension(tree, beta, Property.WEAK_IMMUNE),
            is_practical(tree, beta),
            find_extension(tree, beta, Property.CR))
    verdict = Verdict.HOLDS if all(r.holds for r in subs) else Verdict.FAILS
    failed = [r.property.value for r in subs if not r.holds]
    detail = f"failing parts: {', '.join(failed)}" if failed else ""
    return PropertyReport(Property.SECURE, "history", beta, verdict, sub_reports=subs,
                          detail=detail)


# ---------------------------------------------------------------- normal form

def _restricted(nfg: NormalFormGame, keep: Sequence[Sequence[int]]) -> NormalFormGame:
    labels = tuple(tuple(nfg.strategy_labels[p][i] for i in ks) for p, ks in enumerate(keep))
    payoffs = {}
    for prof in itertools.product(*(range(len(ks)) for ks in keep)):
        payoffs[prof] = nfg.utility(tuple(keep[p][i] for p, i in enumerate(prof)))
    return NormalFormGame(nfg.players, labels, payoffs)


def _weakly_dominated(nfg: NormalFormGame, p: int, s: int) -> bool:
    shape = nfg.shape
    opp_ranges = [range(k) if q != p else [0] for q, k in enumerate(shape)]
    for t in range(shape[p]):
        if t == s:
            continue
        strictly = False
        ok = True
        for opp in itertools.product(*opp_ranges):
            with_s = list(opp)
            with_s[p] = s
            with_t = list(opp)
            with_t[p] = t
            us, ut = nfg.utility(with_s)[p], nfg.utility(with_t)[p]
            if ut < us:
                ok = False
                break
            if ut > us:
                strictly = True
        if ok and strictly:
            return True
    return False


def idwds_rounds(nfg: NormalFormGame) -> list[NormalFormGame]:
    """Every intermediate game of iterated deletion, starting with ``nfg`` itself."""
    games = [nfg]
    while True:
        g = games[-1]
        keep = [[s for s in range(k) if not _weakly_dominated(g, p, s)]
                for p, k in enumerate(g.shape)]
        for p, ks in enumerate(keep):
            if not ks:
                raise EmptyStrategySet(f"deletion emptied the strategies of {g.players[p].name}")
        if all(len(ks) == k for ks, k in zip(keep, g.shape)):
            return games
        games.append(_restricted(g, keep))


def idwds(nfg: NormalFormGame) -> NormalFormGame:
    """Delete all weakly dominated strategies of all players per round, until none remain."""
    return idwds_rounds(nfg)[-1]


def _nfg_coalition_check(nfg: NormalFormGame, prof: tuple[int, ...], prop: Property) -> list[Counterexample]:
    base = nfg.utility(prof)
    cexs = []
    for coal in coalitions(len(nfg.players), prop):
        ranges = [range(k) if q in coal else [prof[q]] for q, k in enumerate(nfg.shape)]
        for dev in itertools.product(*ranges):
            v = violation(prop, coal, nfg.utility(dev), base)
            if v is not None:
                who, lhs, rhs = v
                cexs.append(Counterexample(tuple(nfg.players[q] for q in sorted(coal)),
                                           nfg.labels_of(dev),
                                           None if who is None else nfg.players[who], lhs, rhs))
                break
    return cexs


def _nfg_weak_immune(nfg: NormalFormGame, prof: tuple[int, ...]) -> list[Counterexample]:
    cexs = []
    n = len(nfg.players)
    for p in range(n):
        ranges = [range(k) if q != p else [prof[p]] for q, k in enumerate(nfg.shape)]
        for dev in itertools.product(*ranges):
            u = nfg.utility(dev)[p]
            if u < ZERO:
                cexs.append(Counterexample(tuple(q for q in nfg.players if q.id != p),
                                           nfg.labels_of(dev), nfg.players[p], u, ZERO))
                break
    return cexs


def nfg_practical(nfg: NormalFormGame, profile: Sequence[int]) -> PropertyReport:
    prof = tuple(profile)
    labels = nfg.labels_of(prof)
    rounds = idwds_rounds(nfg)
    reduced = rounds[-1]
    for p, lab in enumerate(labels):
        if lab not in reduced.strategy_labels[p]:
            when = next(r for r, g in enumerate(rounds) if lab not in g.strategy_labels[p])
            return PropertyReport(
                Property.PRACTICAL, "profile", labels, Verdict.FAILS,
                detail=f"strategy {lab} of {nfg.players[p].name} is deleted in round {when}")
    cexs = _nfg_coalition_check(reduced, reduced.index_of(labels), Property.NASH)
    return _report(Property.PRACTICAL, "profile", labels, cexs,
                   detail="" if not cexs else "not a Nash equilibrium of the reduced game")


def nfg_check(nfg: NormalFormGame, profile: Sequence[int], prop: Property) -> PropertyReport:
    prof = tuple(profile)
    labels = nfg.labels_of(prof)
    if prop is Property.PRACTICAL:
        return nfg_practical(nfg, prof)
    if prop is Property.WEAK_IMMUNE:
        return _report(prop, "profile", labels, _nfg_weak_immune(nfg, prof))
    if prop is Property.SECURE:
        subs = (nfg_check(nfg, prof, Property.WEAK_IMMUNE), nfg_practical(nfg, prof),
                nfg_check(nfg, prof, Property.CR))
        verdict = Verdict.HOLDS if all(r.holds for r in subs) else Verdict.FAILS
        return PropertyReport(prop, "profile", labels, verdict, sub_reports=subs)
    return _report(prop, "profile", labels, _nfg_coalition_check(nfg, prof, prop))


def parse_property(text: str) -> Property:
    key = text.strip().upper().replace("-", "_")
    aliases = {"WI": "WEAK_IMMUNE", "NE": "NASH", "SR_SUBSET": "SR_SUBSETEQ",
               "SRSUBSETEQ": "SR_SUBSETEQ", "STRONG_NASH": "SNE"}
    key = aliases.get(key, key)
    try:
        return Property(key)
    except ValueError:
        raise ValueError(f"unknown property {text!r}; choose from "
                         f"{[p.value.lower() for p in Property]}") from None
