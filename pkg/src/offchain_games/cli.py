"""Command-line front end.

Exit codes: 0 when every requested property holds, 1 when some fails,
2 for usage or parse errors.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .analysis import (Property, PropertyReport, check_history, check_resilience,
                       check_secure_strategy, check_weak_immune, is_spe, nfg_check,
                       parse_property, spe_outcomes)
from .dot import to_dot
from .errors import GameError, InvalidParams, ParseError
from .fileformat import (format_history, loads_json, parse_game, parse_history,
                         serialize_game, strategy_from_json)
from .game import GameTree, History, NormalFormGame, validate
from .models import (FIXTURES, ClosingParams, ClosingVariant, OldState, Role, RoutingKind,
                     RoutingParams, build_closing_game, build_routing_game, builtin_fixture,
                     closing_advice, honest_histories)
from .utility import parse_rational

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _rational(text: str) -> Fraction:
    return parse_rational(text, "argument")


def _rational_list(text: str) -> list[Fraction]:
    return [parse_rational(t, "grid value") for t in text.split(",") if t.strip()]


def _variant(text: str) -> ClosingVariant:
    key = text.strip().upper().replace("-", "_")
    aliases = {"PHASE": "PHASE_WRAPPER", "A0": "EDGE_A_ZERO", "B0": "EDGE_B_ZERO"}
    try:
        return ClosingVariant(aliases.get(key, key))
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown variant {text!r}") from None


# ---------------------------------------------------------------- sweep

PRECONDITIONS: dict[str, Callable[[ClosingParams], bool]] = {
    "NONE": lambda p: True,
    "A_B_GEQ_F": lambda p: p.a >= p.f and p.b >= p.f,
    "THM3_INEQS": lambda p: p.a - _need(p, "p_B") + _need(p, "d_A") >= p.f
    and p.b - _need(p, "p_A") + _need(p, "d_B") >= p.f,
    "A_LT_F": lambda p: p.a < p.f,
    "OLD_STATE_BELOW_F": lambda p: p.a + _need(p, "d_A") < p.f,
    "C_EQ_PA": lambda p: _need(p, "c") == _need(p, "p_A"),
    "C_NEQ_PA": lambda p: _need(p, "c") != _need(p, "p_A"),
}


def _need(p: ClosingParams, name: str) -> Fraction:
    v = getattr(p, name)
    if v is None:
        raise InvalidParams(f"the precondition filter needs {name}")
    return v


PARAM_NAMES = ("a", "b", "f", "d_A", "d_B", "p_A", "p_B", "c")


@dataclass
class SweepSpec:
    grid: dict[str, list[Fraction]]
    variant: ClosingVariant
    histories: list[str]  # comma-separated histories, or "@honest"
    properties: list[Property]
    filters: list[str] = field(default_factory=lambda: ["NONE"])


@dataclass
class SweepResult:
    columns: list[str]
    rows: list[tuple[ClosingParams, list[str]]]
    skipped_invalid: int
    filtered_out: int

    def uniform(self) -> Optional[str]:
        cells = {c for _, cells in self.rows for c in cells}
        return cells.pop() if len(cells) == 1 else None


def run_sweep(spec: SweepSpec) -> SweepResult:
    for name in spec.filters:
        if name not in PRECONDITIONS:
            raise InvalidParams(f"unknown precondition filter {name!r}")
    names = [n for n in PARAM_NAMES if spec.grid.get(n)]
    for n in ("a", "b", "f"):
        if n not in names:
            raise InvalidParams(f"the grid needs at least one value for {n}")
    columns = [f"{h}:{p.value}" for h in spec.histories for p in spec.properties]
    rows, skipped, filtered = [], 0, 0
    for combo in itertools.product(*(sorted(set(spec.grid[n])) for n in names)):
        params = ClosingParams(**dict(zip(names, combo)))
        try:
            tree = build_closing_game(params, spec.variant)
        except InvalidParams:
            skipped += 1
            continue
        if not all(PRECONDITIONS[f](params) for f in spec.filters):
            filtered += 1
            continue
        cells = []
        for h in spec.histories:
            betas = honest_histories(tree) if h == "@honest" else [parse_history(h)]
            for prop in spec.properties:
                ok = all(check_history(tree, beta, prop).holds for beta in betas)
                cells.append("HOLDS" if ok else "FAILS")
        rows.append((params, cells))
    rows.sort(key=lambda r: tuple(getattr(r[0], n) for n in names))
    return SweepResult(columns, rows, skipped, filtered)


def format_sweep(result: SweepResult, names: Sequence[str]) -> str:
    header = list(names) + result.columns
    table = [header]
    for params, cells in result.rows:
        table.append([str(getattr(params, n)) for n in names] + cells)
    if not result.rows:
        table.append(["WARNING: no grid point passes the filter"] + [""] * (len(header) - 1))
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in table]
    uniform = result.uniform()
    summary = (f"summary: {len(result.rows)} rows, "
               + (f"uniform {uniform}" if uniform else ("no rows" if not result.rows else "NOT uniform"))
               + f"; {result.filtered_out} filtered out, {result.skipped_invalid} invalid for the variant")
    return "\n".join(lines + [summary]) + "\n"


# ---------------------------------------------------------------- commands

def _read_game(path: str) -> GameTree | NormalFormGame:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        game = parse_game(text)
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if isinstance(game, GameTree):
        defects = validate(game)
        if defects:
            raise ParseError(f"{path}: " + "; ".join(str(d) for d in defects))
    return game


def _write(text: str, out: Optional[str]) -> None:
    if out and out != "-":
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args: argparse.Namespace) -> int:
    if args.model == "closing":
        params = ClosingParams(args.a, args.b, args.f, args.dA, args.dB, args.pA, args.pB, args.c)
        game: GameTree | NormalFormGame = build_closing_game(params, args.variant)
    elif args.model == "routing-prior":
        game = build_routing_game(RoutingKind.PRIOR)
    elif args.model == "routing-refined":
        if args.m is None or args.f is None:
            raise InvalidParams("routing-refined needs --m and --f")
        game = build_routing_game(RoutingKind.REFINED, RoutingParams(args.m, args.f))
    else:
        if not args.name:
            raise InvalidParams(f"fixture needs a name: {', '.join(f.lower() for f in FIXTURES)}")
        game = builtin_fixture(args.name)
    _write(serialize_game(game), args.output)
    return EXIT_OK


def _describe(report: PropertyReport, names_indent: str = "") -> list[str]:
    subj = report.subject
    if report.subject_kind == "history":
        subject = format_history(subj)
    elif report.subject_kind == "profile":
        subject = "(" + ",".join(subj) + ")"
    else:
        subject = "strategy"
    lines = [f"{names_indent}{report.property.value} {subject}: {report.verdict.value}"]
    for cex in report.counterexamples:
        who = f" player {cex.violating_player.name}" if cex.violating_player else ""
        lines.append(f"{names_indent}  counterexample: coalition {{{','.join(p.name for p in cex.coalition)}}}"
                     f" via {format_history(cex.deviation_leaf)}{who}: {cex.lhs} vs {cex.rhs}")
    if report.detail:
        lines.append(f"{names_indent}  {report.detail}")
    for sub in report.sub_reports:
        lines.extend(_describe(sub, names_indent + "  "))
    return lines


def cmd_check(args: argparse.Namespace) -> int:
    game = _read_game(args.game)
    props = [parse_property(p) for p in (args.property or ["secure"])]
    reports: list[PropertyReport] = []
    if isinstance(game, NormalFormGame):
        if args.profile is None:
            raise InvalidParams("normal-form games are checked with --profile LABEL,LABEL,...")
        prof = game.index_of(parse_history(args.profile))
        reports = [nfg_check(game, prof, p) for p in props]
    elif args.strategy is not None:
        with open(args.strategy, encoding="utf-8") as fh:
            sigma = strategy_from_json(loads_json(fh.read()))
        for p in props:
            if p is Property.WEAK_IMMUNE:
                reports.append(check_weak_immune(game, sigma))
            elif p is Property.PRACTICAL:
                reports.append(is_spe(game, sigma))
            elif p is Property.SECURE:
                reports.append(check_secure_strategy(game, sigma))
            else:
                reports.append(check_resilience(game, sigma, p))
    elif args.history is not None:
        beta = parse_history(args.history)
        reports = [check_history(game, beta, p) for p in props]
    else:
        raise InvalidParams("give --history, --strategy or --profile")
    if args.json:
        sys.stdout.write(json.dumps([r.to_json() for r in reports], indent=2) + "\n")
    else:
        for r in reports:
            sys.stdout.write("\n".join(_describe(r)) + "\n")
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FAIL


def cmd_spe(args: argparse.Namespace) -> int:
    game = _read_game(args.game)
    if not isinstance(game, GameTree):
        raise InvalidParams("spe needs an extensive-form game")
    for hist, utils in spe_outcomes(game)[()]:
        sys.stdout.write(f"{format_history(hist)} -> ({', '.join(str(u) for u in utils)})\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    grid = {n: getattr(args, n.replace("_", "")) for n in PARAM_NAMES}
    grid = {n: v for n, v in grid.items() if v}
    spec = SweepSpec(grid, args.variant, args.history or ["C_h,S"],
                     [parse_property(p) for p in (args.property or ["secure"])],
                     [f.upper() for f in (args.filter or ["NONE"])])
    result = run_sweep(spec)
    names = [n for n in PARAM_NAMES if n in grid]
    if not result.rows:
        sys.stderr.write("warning: no grid point passes the filter\n")
    sys.stdout.write(format_sweep(result, names))
    return EXIT_OK


def _old_state(text: str) -> OldState:
    who, _, amount = text.partition(":")
    if who.strip().upper() not in ("A", "B") or not amount:
        raise argparse.ArgumentTypeError(f"old state must look like A:1/2 or B:3, got {text!r}")
    return OldState(parse_rational(amount, "old state"), who.strip().upper())


def cmd_advice(args: argparse.Namespace) -> int:
    params = ClosingParams(args.a, args.b, args.f)
    advice = closing_advice(params, args.old or [], Role(args.role.upper()),
                            args.situation, args.gain)
    sys.stdout.write(f"{args.role.upper()} -> {advice.recommendation}\n  because {advice.rationale}\n")
    return EXIT_OK


def cmd_export_dot(args: argparse.Namespace) -> int:
    game = _read_game(args.game)
    if not isinstance(game, GameTree):
        raise InvalidParams("export-dot needs an extensive-form game")
    highlight = parse_history(args.highlight) if args.highlight is not None else None
    _write(to_dot(game, highlight), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="offchain-games",
                                     description="Build and check off-chain closing and routing games.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a model as a game file")
    gen.add_argument("model", choices=["closing", "routing-prior", "routing-refined", "fixture"])
    gen.add_argument("name", nargs="?", help="fixture name (gamma1, gamma2, gamma3, gamma-e)")
    gen.add_argument("--variant", type=_variant, default=ClosingVariant.FULL)
    for flag in ("a", "b", "f", "dA", "dB", "pA", "pB", "c", "m"):
        gen.add_argument(f"--{flag}", type=_rational)
    gen.add_argument("-o", "--output")
    gen.set_defaults(func=cmd_generate)

    chk = sub.add_parser("check", help="check properties of a history, strategy or profile")
    chk.add_argument("game")
    subject = chk.add_mutually_exclusive_group()
    subject.add_argument("--history", help="comma-separated action labels, e.g. C_h,S")
    subject.add_argument("--strategy", help="JSON file mapping node paths to labels")
    subject.add_argument("--profile", help="normal-form strategy labels, one per player")
    chk.add_argument("--property", "-p", action="append",
                     help="weak_immune, nash, sr, sr_subseteq, sne, cr, practical, secure (repeatable)")
    chk.add_argument("--json", action="store_true", help="print machine-readable reports")
    chk.set_defaults(func=cmd_check)

    sw = sub.add_parser("sweep", help="check closing-game histories over a parameter grid")
    sw.add_argument("--variant", type=_variant, default=ClosingVariant.FULL)
    for flag in ("a", "b", "f", "dA", "dB", "pA", "pB", "c"):
        sw.add_argument(f"--{flag}", type=_rational_list, help="comma-separated rationals")
    sw.add_argument("--history", action="append", help="history such as C_h,S, or @honest (repeatable)")
    sw.add_argument("--property", "-p", action="append")
    sw.add_argument("--filter", action="append", help=", ".join(PRECONDITIONS))
    sw.set_defaults(func=cmd_sweep)

    spe = sub.add_parser("spe", help="list subgame perfect histories with outcomes")
    spe.add_argument("game")
    spe.set_defaults(func=cmd_spe)

    adv = sub.add_parser("advice", help="recommended closing move")
    adv.add_argument("--role", choices=["initiator", "reactor", "INITIATOR", "REACTOR"], required=True)
    for flag in ("a", "b", "f"):
        adv.add_argument(f"--{flag}", type=_rational, required=True)
    adv.add_argument("--old", type=_old_state, action="append",
                     help="old state as BENEFICIARY:GAIN, e.g. A:1/4 (repeatable)")
    adv.add_argument("--situation", choices=["C_h", "C_c", "D", "I", "S", "H"])
    adv.add_argument("--gain", type=_rational, help="the cheater's gain d_A when reacting to D")
    adv.set_defaults(func=cmd_advice)

    dot = sub.add_parser("export-dot", help="render a game tree as Graphviz DOT")
    dot.add_argument("game")
    dot.add_argument("--highlight", help="history to draw in red")
    dot.add_argument("-o", "--output")
    dot.set_defaults(func=cmd_export_dot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (GameError, KeyError, ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
