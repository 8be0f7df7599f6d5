"""Optimal and greedy fusion strategies for balanced binary relay trees."""

from .core import (
    EQUAL_PRIORS,
    RULES,
    ErrorState,
    FusionRule,
    Priors,
    Strategy,
    apply_rule,
    apply_strategy,
    format_strategy,
    parse_strategy,
    reflect,
    reward,
    total_error,
    ulrt_rules,
)
from .simulator import SimConfig, SimReport, decay_profile, simulate
from .strategies import (
    ValuedStrategy,
    enumerate_all,
    enumerate_ulrt_strategies,
    greedy_strategy,
    optimal_strategy,
)
from .strings import PAIRS, CheckReport, PairedRule, greedy_string, restriction_gap, u_reduction

__all__ = [
    "EQUAL_PRIORS",
    "RULES",
    "PAIRS",
    "CheckReport",
    "ErrorState",
    "FusionRule",
    "PairedRule",
    "Priors",
    "SimConfig",
    "SimReport",
    "Strategy",
    "ValuedStrategy",
    "apply_rule",
    "apply_strategy",
    "decay_profile",
    "enumerate_all",
    "enumerate_ulrt_strategies",
    "format_strategy",
    "greedy_strategy",
    "greedy_string",
    "optimal_strategy",
    "parse_strategy",
    "reflect",
    "restriction_gap",
    "reward",
    "simulate",
    "total_error",
    "u_reduction",
    "ulrt_rules",
]
