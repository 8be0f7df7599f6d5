"""Error-probability dynamics of a balanced binary relay tree.

Every fusion node at level k combines two i.i.d. child messages with the
same rule, so one (alpha, beta) pair describes a whole level.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Tuple

# |alpha - beta| <= TIE_EPS * max(alpha, beta) counts as a tie between the
# two rules. Relative, so the band still resolves states far below 1e-12.
TIE_EPS = 1e-12


class FusionRule(str, enum.Enum):
    """Binary fusion rule. String values order A < O."""

    A = "A"  # AND: parent sends 1 iff both children send 1
    O = "O"  # OR: parent sends 0 iff both children send 0

    def __str__(self) -> str:
        return self.value


RULES: Tuple[FusionRule, FusionRule] = (FusionRule.A, FusionRule.O)

Strategy = Tuple[FusionRule, ...]


def _check_prob(name: str, x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x!r}")


@dataclass(frozen=True)
class ErrorState:
    """Type I (false alarm) and Type II (missed detection) error pair."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        _check_prob("alpha", self.alpha)
        _check_prob("beta", self.beta)

    def __iter__(self):
        yield self.alpha
        yield self.beta

    @property
    def total(self) -> float:
        return self.alpha + self.beta


@dataclass(frozen=True)
class Priors:
    p0: float = 0.5
    p1: float = 0.5

    def __post_init__(self) -> None:
        _check_prob("p0", self.p0)
        _check_prob("p1", self.p1)
        if abs(self.p0 + self.p1 - 1.0) > 1e-12:
            raise ValueError(f"priors must sum to 1, got {self.p0} + {self.p1}")

    @classmethod
    def from_h0(cls, p0: float) -> "Priors":
        return cls(p0, 1.0 - p0)

    @property
    def equal(self) -> bool:
        return self.p0 == self.p1


EQUAL_PRIORS = Priors()


def parse_strategy(text: str) -> Strategy:
    """Parse ``"AOA"`` into a strategy. Whitespace is ignored."""
    rules = []
    for ch in text.replace(" ", "").upper():
        try:
            rules.append(FusionRule(ch))
        except ValueError:
            raise ValueError(f"invalid fusion rule {ch!r} in strategy {text!r}") from None
    return tuple(rules)


def format_strategy(strategy: Iterable[FusionRule]) -> str:
    return "".join(r.value for r in strategy)


def apply_rule(state: ErrorState, rule: FusionRule) -> ErrorState:
    """Error pair one level up when every node at that level uses ``rule``.

    ``1 - (1 - x)**2`` is evaluated as ``x * (2 - x)``, which keeps full
    relative precision for small x.
    """
    a, b = state.alpha, state.beta
    if rule is FusionRule.A:
        return ErrorState(a * (2.0 - a), b * b)
    if rule is FusionRule.O:
        return ErrorState(a * a, b * (2.0 - b))
    raise TypeError(f"not a FusionRule: {rule!r}")


def apply_strategy(state: ErrorState, strategy: Iterable[FusionRule]) -> ErrorState:
    for rule in strategy:
        state = apply_rule(state, rule)
    return state


def trajectory(state: ErrorState, strategy: Iterable[FusionRule]) -> list[ErrorState]:
    """States at levels 0..h, inclusive."""
    out = [state]
    for rule in strategy:
        state = apply_rule(state, rule)
        out.append(state)
    return out


def total_error(state: ErrorState, priors: Priors = EQUAL_PRIORS) -> float:
    return priors.p0 * state.alpha + priors.p1 * state.beta


def reduction(before: ErrorState, after: ErrorState, priors: Priors = EQUAL_PRIORS) -> float:
    """Twice the drop in total error; equals (a+b) - (a'+b') for equal priors."""
    return 2.0 * (total_error(before, priors) - total_error(after, priors))


def reward(state: ErrorState, rule: FusionRule, priors: Priors = EQUAL_PRIORS) -> float:
    return reduction(state, apply_rule(state, rule), priors)


def ulrt_rules(state: ErrorState, eps: float = TIE_EPS) -> frozenset[FusionRule]:
    """Unit-threshold likelihood-ratio rule(s) for the current level."""
    diff = state.beta - state.alpha
    band = eps * max(state.alpha, state.beta)
    if diff > band:
        return frozenset({FusionRule.A})
    if diff < -band:
        return frozenset({FusionRule.O})
    return frozenset(RULES)


def reflect(state: ErrorState) -> ErrorState:
    """Mirror image across the line alpha + beta = 1."""
    return ErrorState(1.0 - state.beta, 1.0 - state.alpha)


def require_regime(state: ErrorState) -> None:
    """Solvers only accept states strictly below the alpha + beta = 1 line."""
    if not state.alpha + state.beta < 1.0:
        raise ValueError(
            f"initial state must satisfy alpha + beta < 1, got "
            f"alpha={state.alpha}, beta={state.beta}"
        )
