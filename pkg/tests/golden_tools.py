"""Helpers that render closing-game trees as reviewable golden text."""

from fractions import Fraction

from offchain_games.game import Internal, Leaf, iter_nodes
from offchain_games.models import ClosingParams

# distinct powers of three: a balanced-ternary digit per parameter
WEIGHTS = (("f", 1), ("d_A", 3), ("d_B", 9), ("p_A", 27), ("p_B", 81), ("c", 243), ("a", 729), ("b", 2187))
TERNARY_PARAMS = ClosingParams(a=729, b=2187, f=1, d_A=3, d_B=9, p_A=27, p_B=81, c=243)


def decode_real(x: Fraction) -> str:
    assert x.denominator == 1
    n = int(x)
    terms = []
    for name, _ in WEIGHTS:
        digit = n % 3
        if digit == 2:
            digit = -1
        n = (n - digit) // 3
        if digit:
            terms.append(("-" if digit < 0 else "+") + name)
    assert n == 0, f"coefficient outside {{-1,0,1}} in {x}"
    return "".join(reversed(terms))


def expression(u) -> str:
    out = decode_real(u.real)
    for name in ("rho", "alpha", "eps"):
        coeff = getattr(u, name)
        assert coeff in (-1, 0, 1), (name, coeff)
        if coeff:
            out += ("-" if coeff < 0 else "+") + name
    out = out.lstrip("+")
    return out or "0"


def structure_lines(tree):
    lines = []
    for path, node in iter_nodes(tree.root):
        if isinstance(node, Internal):
            lines.append(f"{','.join(path) or '.'} {tree.players[node.player].name} {' '.join(node.labels)}")
    return lines


def leaf_lines(tree):
    return [f"{','.join(path)} ({'; '.join(expression(u) for u in node.utilities)})"
            for path, node in iter_nodes(tree.root) if isinstance(node, Leaf)]
