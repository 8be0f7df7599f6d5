"""String functions, greedy strings and string-submodularity checkers.

Strings are plain tuples over a finite alphabet. A string function is any
callable mapping such a tuple to a float. The checkers enumerate every
string up to a depth, so keep alphabets and depths small.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterator, Sequence, Tuple

from .core import (
    EQUAL_PRIORS,
    ErrorState,
    FusionRule,
    Priors,
    Strategy,
    apply_strategy,
    reduction,
    require_regime,
)
from .strategies import optimal_strategy

ActionString = Tuple[Hashable, ...]
StringFunction = Callable[[ActionString], float]

TOL = 1e-12
GREEDY_FACTOR = 1.0 - math.exp(-1.0)
# exhaustive condition-ii check is exponential in K; refuse beyond this
EXHAUSTIVE_MAX_K = 8


def concat(m: ActionString, n: ActionString) -> ActionString:
    return tuple(m) + tuple(n)


def is_prefix(m: ActionString, n: ActionString) -> bool:
    """True when ``m`` is a prefix of ``n`` (written M ⪯ N)."""
    return len(m) <= len(n) and tuple(n[: len(m)]) == tuple(m)


def all_strings(alphabet: Sequence[Hashable], max_len: int) -> Iterator[ActionString]:
    """Every string of length 0..max_len, shortest first, in alphabet order."""
    for k in range(max_len + 1):
        yield from itertools.product(alphabet, repeat=k)


class PairedRule(enum.Enum):
    """Fusion rules for two consecutive levels."""

    AO = (FusionRule.A, FusionRule.O)
    OA = (FusionRule.O, FusionRule.A)

    @property
    def rules(self) -> Strategy:
        return self.value

    def __str__(self) -> str:
        return self.name


PAIRS: Tuple[PairedRule, PairedRule] = (PairedRule.AO, PairedRule.OA)

PairedStrategy = Tuple[PairedRule, ...]


def flatten(pi: Sequence[PairedRule]) -> Strategy:
    return tuple(rule for pair in pi for rule in pair.rules)


def parse_paired(text: str) -> PairedStrategy:
    """Parse ``"AO,OA"``. An empty string is the empty strategy."""
    text = text.replace(" ", "").upper()
    if not text:
        return ()
    try:
        return tuple(PairedRule[tok] for tok in text.split(","))
    except KeyError as exc:
        raise ValueError(f"invalid paired rule {exc.args[0]!r} in {text!r}") from None


def format_paired(pi: Sequence[PairedRule]) -> str:
    return ",".join(p.name for p in pi)


def u_reduction(initial: ErrorState, pi: Sequence[PairedRule], priors: Priors = EQUAL_PRIORS) -> float:
    """Error reduction after applying the flattened paired strategy."""
    require_regime(initial)
    return reduction(initial, apply_strategy(initial, flatten(pi)), priors)


def reduction_function(initial: ErrorState, priors: Priors = EQUAL_PRIORS) -> StringFunction:
    """``u`` at a fixed initial state, as a memoised string function over pairs."""
    require_regime(initial)
    cache: dict[ActionString, float] = {}

    def u(pi: ActionString) -> float:
        pi = tuple(pi)
        if pi not in cache:
            cache[pi] = reduction(initial, apply_strategy(initial, flatten(pi)), priors)
        return cache[pi]

    return u


def greedy_string(
    f: StringFunction,
    alphabet: Sequence[Hashable],
    K: int,
    order: Sequence[Hashable] | None = None,
) -> ActionString:
    """Build a string of length K one action at a time, maximising marginal gain.

    Ties go to the action that comes first in ``order`` (default: the
    alphabet's own order).
    """
    rank = {a: i for i, a in enumerate(order if order is not None else alphabet)}
    candidates = sorted(alphabet, key=rank.__getitem__)
    g: ActionString = ()
    for _ in range(K):
        base = f(g)
        best, best_gain = None, -math.inf
        for a in candidates:
            gain = f(g + (a,)) - base
            if gain > best_gain:
                best, best_gain = a, gain
        g = g + (best,)
    return g


def all_greedy_strings(f: StringFunction, alphabet: Sequence[Hashable], K: int, tol: float = TOL) -> set[ActionString]:
    """Every greedy string of length K, branching where marginal gains tie within ``tol``."""
    frontier: list[ActionString] = [()]
    for _ in range(K):
        nxt = []
        for g in frontier:
            gains = {a: f(g + (a,)) - f(g) for a in alphabet}
            top = max(gains.values())
            nxt.extend(g + (a,) for a in alphabet if gains[a] >= top - tol)
        frontier = nxt
    return set(frontier)


def _label(s: ActionString) -> list[str]:
    return [str(getattr(a, "name", a)) for a in s]


@dataclass
class CheckReport:
    """Outcome of one property check.

    ``violations`` holds dicts with the offending strings and the slack
    (negative means the inequality failed by that much). ``details`` carries
    check-specific summary values.
    """

    check: str
    passed: bool
    violations: list[dict[str, Any]] = field(default_factory=list)
    instances_checked: int = 0
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "passed": self.passed,
            "instances_checked": self.instances_checked,
            "violations": self.violations,
            "details": self.details,
        }


def _sort_violations(violations: list[dict[str, Any]]) -> list[dict[str, Any]]:
    return sorted(violations, key=lambda v: (v["slack"], repr(sorted(v.items()))))


def check_monotone(f: StringFunction, alphabet: Sequence[Hashable], depth: int, tol: float = TOL) -> CheckReport:
    """f(M) <= f(M + (a,)) for every |M| < depth and every action a."""
    violations = []
    n = 0
    for m in all_strings(alphabet, depth - 1):
        fm = f(m)
        for a in alphabet:
            n += 1
            slack = f(m + (a,)) - fm
            if slack < -tol:
                violations.append({"M": _label(m), "a": _label((a,))[0], "slack": slack})
    return CheckReport("monotone", not violations, _sort_violations(violations), n)


def check_diminishing_returns(
    f: StringFunction, alphabet: Sequence[Hashable], depth: int, tol: float = TOL
) -> CheckReport:
    """f(M+a) - f(M) >= f(N+a) - f(N) for all prefixes M of N, |N| <= depth."""
    violations = []
    n = 0
    for big in all_strings(alphabet, depth):
        fn = f(big)
        for a in alphabet:
            gain_n = f(big + (a,)) - fn
            for k in range(len(big)):
                m = big[:k]
                n += 1
                slack = (f(m + (a,)) - f(m)) - gain_n
                if slack < -tol:
                    violations.append(
                        {"M": _label(m), "N": _label(big), "a": _label((a,))[0], "slack": slack}
                    )
    return CheckReport("dimret", not violations, _sort_violations(violations), n)


def check_lemma1(f: StringFunction, alphabet: Sequence[Hashable], depth: int, tol: float = TOL) -> CheckReport:
    """Compare the one-step diminishing-return condition with the full one.

    One-step side: f((a,)) - f(()) >= f((a0, a)) - f((a0,)) for all a0, a.
    Full side: ``check_diminishing_returns`` up to ``depth``. The report
    passes when both sides agree; ``details`` records each side.
    """
    one_step = []
    n = 0
    f0 = f(())
    for a0 in alphabet:
        f_a0 = f((a0,))
        for a in alphabet:
            n += 1
            slack = (f((a,)) - f0) - (f((a0, a)) - f_a0)
            if slack < -tol:
                one_step.append({"a0": _label((a0,))[0], "a": _label((a,))[0], "slack": slack})
    full = check_diminishing_returns(f, alphabet, depth, tol)
    one_ok = not one_step
    agree = one_ok == full.passed
    violations = []
    if not agree:
        witnesses = one_step if not one_ok else full.violations
        side = "one_step" if not one_ok else "full"
        violations = [dict(w, side=side) for w in witnesses]
    return CheckReport(
        "lemma1",
        agree,
        _sort_violations(violations),
        n + full.instances_checked,
        {
            "one_step_holds": one_ok,
            "full_holds": full.passed,
            "agree": agree,
            "one_step_violations": len(one_step),
            "full_violations": len(full.violations),
        },
    )


def optimal_strings(
    f: StringFunction, alphabet: Sequence[Hashable], K: int, tol: float = TOL
) -> tuple[float, list[ActionString]]:
    """Exhaustive maximum of f over alphabet**K and every string within ``tol`` of it."""
    values = [(s, f(s)) for s in itertools.product(alphabet, repeat=K)]
    best = max(v for _, v in values)
    return best, [s for s, v in values if v >= best - tol]


@dataclass(frozen=True)
class RestrictionGap:
    paired: PairedStrategy
    paired_value: float
    flat: Strategy
    flat_value: float

    @property
    def gap(self) -> float:
        return self.flat_value - self.paired_value


def restriction_gap(initial: ErrorState, K: int, priors: Priors = EQUAL_PRIORS) -> RestrictionGap:
    """How much the best pair string loses against the best unrestricted 2K-level strategy."""
    u = reduction_function(initial, priors)
    value, optima = optimal_strings(u, PAIRS, K)
    flat = optimal_strategy(initial, 2 * K, priors)
    return RestrictionGap(optima[0], value, flat.strategy, flat.value)


def check_greedy_bound(
    f: StringFunction,
    alphabet: Sequence[Hashable],
    K: int,
    tol: float = TOL,
    exhaustive: bool = False,
) -> CheckReport:
    """Check (1 - 1/e) f(O) < f(G_K) <= f(O) against the exhaustive optimum O.

    Also checks f(G + O) >= f(O) for every proper prefix G of the greedy
    string. With ``exhaustive`` every greedy string (ties branched) is
    paired with every optimal string instead of just the witnessed pair.
    """
    f_empty = f(())
    if abs(f_empty) > tol:
        raise ValueError(f"greedy bound needs f(()) == 0, got {f_empty!r}")
    if exhaustive and K > EXHAUSTIVE_MAX_K:
        raise ValueError(f"exhaustive check limited to K <= {EXHAUSTIVE_MAX_K}")

    g = greedy_string(f, alphabet, K)
    f_opt, optima = optimal_strings(f, alphabet, K, tol)
    o = optima[0]
    f_g = f(g)
    violations = []
    n = 0

    n += 1
    lower = f_g - GREEDY_FACTOR * f_opt
    if not lower > -tol:
        violations.append({"G": _label(g), "O": _label(o), "bound": "lower", "slack": lower})
    n += 1
    upper = f_opt - f_g
    if upper < -tol:
        violations.append({"G": _label(g), "O": _label(o), "bound": "upper", "slack": upper})

    if exhaustive:
        greedy_set = sorted(all_greedy_strings(f, alphabet, K, tol), key=_label)
        prefixes = sorted({s[:k] for s in greedy_set for k in range(K)}, key=lambda s: (len(s), _label(s)))
        pairs = [(p, opt) for p in prefixes for opt in optima]
    else:
        pairs = [(g[:k], o) for k in range(K)]
    for prefix, opt in pairs:
        n += 1
        f_o = f(opt)
        slack = f(prefix + opt) - f_o
        if slack < -tol:
            violations.append({"G": _label(prefix), "O": _label(opt), "bound": "condition_ii", "slack": slack})

    ratio = f_g / f_opt if f_opt > 0 else 1.0
    return CheckReport(
        "bound",
        not violations,
        _sort_violations(violations),
        n,
        {
            "greedy": _label(g),
            "optimal": _label(o),
            "f_greedy": f_g,
            "f_optimal": f_opt,
            "ratio": ratio,
            "factor": GREEDY_FACTOR,
        },
    )


# Small synthetic string functions; they keep the checkers falsifiable.
def length(s: ActionString) -> float:
    return float(len(s))


def neg_length(s: ActionString) -> float:
    return -float(len(s))


def step(s: ActionString) -> float:
    """0 below length 2, 1 from there on: the marginal gain jumps up."""
    return 0.0 if len(s) < 2 else 1.0


def saturating(s: ActionString) -> float:
    return 1.0 - 0.5 ** len(s)


def squared_length(s: ActionString) -> float:
    return float(len(s) ** 2)


SYNTHETIC: dict[str, StringFunction] = {
    "length": length,
    "neg_length": neg_length,
    "step": step,
    "saturating": saturating,
    "square": squared_length,
}
