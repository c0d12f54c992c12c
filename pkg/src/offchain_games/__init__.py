"""Game-theoretic security checks for off-chain payment channel protocols."""

from .analysis import (Property, PropertyReport, Verdict, check_resilience, check_secure,
                       check_weak_immune, find_extension, idwds, is_practical, is_spe,
                       nfg_check, nfg_practical, spe_histories, spe_outcomes)
from .game import (GameTree, JointStrategy, NormalFormGame, Player, Restriction,
                   efg_to_nfg, play_out, reachable_leaves, subgame_at, validate)
from .models import (ClosingParams, ClosingVariant, RoutingKind, RoutingParams,
                     build_closing_game, build_routing_game, builtin_fixture, closing_advice)
from .utility import ALPHA, EPS, RHO, ZERO, UtilityValue, cmp

__all__ = [
    "ALPHA", "EPS", "RHO", "ZERO", "UtilityValue", "cmp",
    "GameTree", "JointStrategy", "NormalFormGame", "Player", "Restriction",
    "efg_to_nfg", "play_out", "reachable_leaves", "subgame_at", "validate",
    "Property", "PropertyReport", "Verdict", "check_resilience", "check_secure",
    "check_weak_immune", "find_extension", "idwds", "is_practical", "is_spe",
    "nfg_check", "nfg_practical", "spe_histories", "spe_outcomes",
    "ClosingParams", "ClosingVariant", "RoutingKind", "RoutingParams",
    "build_closing_game", "build_routing_game", "builtin_fixture", "closing_advice",
]
