"""Greedy, exhaustive and Bellman-optimal fusion strategies."""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    EQUAL_PRIORS,
    RULES,
    TIE_EPS,
    ErrorState,
    FusionRule,
    Priors,
    Strategy,
    apply_rule,
    reduction,
    require_regime,
    reward,
    ulrt_rules,
)

H_MAX = 25
ENUMERATE_MAX = 20
# Two branch values closer than this are treated as equal.
VALUE_TOL = 1e-12


@dataclass(frozen=True)
class ValuedStrategy:
    strategy: Strategy
    value: float
    final_state: ErrorState


def _check_height(h: int, limit: int, what: str) -> None:
    if h < 0:
        raise ValueError(f"height must be >= 0, got {h}")
    if h > limit:
        raise ValueError(f"{what}: height {h} exceeds limit {limit}")


def greedy_rule(state: ErrorState, priors: Priors = EQUAL_PRIORS) -> FusionRule:
    """Rule with the larger one-step reward; ties go to A.

    With equal priors this is the ULRT rule, with the tie band taken on
    |alpha - beta| as in ``ulrt_rules``.
    """
    if priors.equal:
        return min(ulrt_rules(state))
    ra = reward(state, FusionRule.A, priors)
    ro = reward(state, FusionRule.O, priors)
    return FusionRule.O if ro > ra + TIE_EPS else FusionRule.A


def greedy_strategy(initial: ErrorState, h: int, priors: Priors = EQUAL_PRIORS) -> ValuedStrategy:
    require_regime(initial)
    _check_height(h, 10**6, "greedy_strategy")
    state = initial
    rules = []
    for _ in range(h):
        rule = greedy_rule(state, priors)
        rules.append(rule)
        state = apply_rule(state, rule)
    return ValuedStrategy(tuple(rules), reduction(initial, state, priors), state)


def enumerate_ulrt_strategies(initial: ErrorState, h: int) -> set[Strategy]:
    """Every strategy that follows a ULRT rule at each level, branching on ties."""
    require_regime(initial)
    _check_height(h, ENUMERATE_MAX, "enumerate_ulrt_strategies")
    frontier: list[tuple[Strategy, ErrorState]] = [((), initial)]
    for _ in range(h):
        frontier = [
            (prefix + (rule,), apply_rule(state, rule))
            for prefix, state in frontier
            for rule in sorted(ulrt_rules(state))
        ]
    return {prefix for prefix, _ in frontier}


def _bellman(state: ErrorState, remaining: int, priors: Priors) -> tuple[float, Strategy, ErrorState]:
    # v(s, n) = max over rules of r(s, rule) + v(s', n - 1)
    if remaining == 0:
        return 0.0, (), state
    best = None
    for rule in RULES:
        nxt = apply_rule(state, rule)
        tail_value, tail, final = _bellman(nxt, remaining - 1, priors)
        value = reward(state, rule, priors) + tail_value
        # A is visited first and keeps exact ties. A tolerance band here
        # would compound across levels.
        if best is None or value > best[0]:
            best = (value, (rule,) + tail, final)
    return best


def optimal_strategy(
    initial: ErrorState, h: int, priors: Priors = EQUAL_PRIORS, h_max: int = H_MAX
) -> ValuedStrategy:
    """h-optimal strategy by depth-first evaluation of Bellman's equations.

    The state space is continuous, so there is no memo table; cost is
    O(2**h). Exact ties resolve toward A at the earliest level.
    """
    require_regime(initial)
    _check_height(h, h_max, "optimal_strategy")
    value, strategy, final = _bellman(initial, h, priors)
    return ValuedStrategy(strategy, value, final)


def enumerate_all(initial: ErrorState, h: int, priors: Priors = EQUAL_PRIORS) -> list[ValuedStrategy]:
    """All 2**h strategies, best first; equal values keep lexicographic order."""
    require_regime(initial)
    _check_height(h, ENUMERATE_MAX, "enumerate_all")
    # breadth-first with shared prefixes; children appended A then O keeps
    # the frontier in lexicographic order
    frontier: list[tuple[Strategy, ErrorState]] = [((), initial)]
    for _ in range(h):
        frontier = [
            (prefix + (rule,), apply_rule(state, rule))
            for prefix, state in frontier
            for rule in RULES
        ]
    out = [ValuedStrategy(s, reduction(initial, final, priors), final) for s, final in frontier]
    out.sort(key=lambda v: -v.value)
    return out


def argmax_set(valued: list[ValuedStrategy], tol: float = VALUE_TOL) -> set[Strategy]:
    """Strategies whose value is within ``tol`` of the best."""
    best = max(v.value for v in valued)
    return {v.strategy for v in valued if v.value >= best - tol}
