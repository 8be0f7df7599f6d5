"""Monte Carlo simulation of the relay tree, plus the analytic decay profile.

A message bit of 1 is a vote for H0 and 0 a vote for H1. With that reading
the AND rule (1 iff both children send 1) raises the false-alarm rate to
1 - (1 - a)**2 and squares the miss rate, matching ``core.apply_rule``.

Trials are split into fixed-size blocks. Each block draws from its own
Philox stream keyed by (seed, hypothesis, block index), so the counts do
not depend on how many workers process the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .core import (
    EQUAL_PRIORS,
    ErrorState,
    FusionRule,
    Priors,
    Strategy,
    TIE_EPS,
    apply_strategy,
    require_regime,
    total_error,
    trajectory,
)
from .strategies import greedy_strategy

Z_99 = 2.576
MAX_SIM_HEIGHT = 20
MAX_DECAY_HEIGHT = 60
# bits held in memory per block: trials_per_block * 2**h
_BLOCK_BITS = 1 << 22
_BLOCK_TRIALS = 1 << 14


@dataclass(frozen=True)
class SimConfig:
    initial: ErrorState
    strategy: Strategy
    trials: int
    seed: int = 0
    workers: int = 1

    def __post_init__(self) -> None:
        require_regime(self.initial)
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0 or self.seed >= 1 << 64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if len(self.strategy) > MAX_SIM_HEIGHT:
            raise ValueError(f"tree height {len(self.strategy)} exceeds limit {MAX_SIM_HEIGHT}")

    @property
    def height(self) -> int:
        return len(self.strategy)

    @property
    def sensors(self) -> int:
        return 1 << self.height


def half_width(p_hat: float, trials: int, z: float = Z_99) -> float:
    return z * math.sqrt(p_hat * (1.0 - p_hat) / trials)


@dataclass(frozen=True)
class SimReport:
    alpha_hat: float
    beta_hat: float
    trials: int
    half_width_alpha: float
    half_width_beta: float
    analytic: ErrorState

    @property
    def alpha_ok(self) -> bool:
        return abs(self.alpha_hat - self.analytic.alpha) <= self.half_width_alpha

    @property
    def beta_ok(self) -> bool:
        return abs(self.beta_hat - self.analytic.beta) <= self.half_width_beta

    @property
    def total_ok(self) -> bool:
        """Summed error within the summed half-widths."""
        diff = (self.alpha_hat + self.beta_hat) - self.analytic.total
        return abs(diff) <= self.half_width_alpha + self.half_width_beta

    def to_dict(self) -> dict:
        d = asdict(self)
        d["analytic"] = {"alpha": self.analytic.alpha, "beta": self.analytic.beta}
        return d


def fold_levels(bits: np.ndarray, strategy: Strategy) -> np.ndarray:
    """Fuse sibling pairs level by level. ``bits`` has shape (trials, 2**h)."""
    for rule in strategy:
        left, right = bits[:, 0::2], bits[:, 1::2]
        bits = (left & right) if rule is FusionRule.A else (left | right)
    return bits[:, 0]


def fuse_tree(leaves, strategy: Strategy) -> int:
    """Root message of one tree, computed recursively from the root down.

    Independent reference for ``fold_levels``: node at level k covering
    leaves [lo, lo + 2**k) fuses its two halves with ``strategy[k - 1]``.
    """

    def node(level: int, lo: int) -> int:
        if level == 0:
            return int(leaves[lo])
        half = 1 << (level - 1)
        left = node(level - 1, lo)
        right = node(level - 1, lo + half)
        if strategy[level - 1] is FusionRule.A:
            return left & right
        return left | right

    return node(len(strategy), 0)


def _block_trials(height: int) -> int:
    return max(1, min(_BLOCK_TRIALS, _BLOCK_BITS >> height))


def _count_block(config: SimConfig, hypothesis: int, block: int, n: int) -> int:
    """Number of wrong root decisions in one block of ``n`` trials."""
    ss = np.random.SeedSequence([config.seed, hypothesis, block])
    rng = np.random.Generator(np.random.Philox(ss))
    draws = rng.random((n, config.sensors))
    if hypothesis == 0:
        bits = draws >= config.initial.alpha  # false alarm: sensor sends 0
    else:
        bits = draws < config.initial.beta  # miss: sensor sends 1
    root = fold_levels(bits, config.strategy)
    return int(n - root.sum()) if hypothesis == 0 else int(root.sum())


def _count_errors(config: SimConfig, hypothesis: int) -> int:
    size = _block_trials(config.height)
    jobs = []
    for block, start in enumerate(range(0, config.trials, size)):
        jobs.append((block, min(size, config.trials - start)))
    if config.workers == 1:
        return sum(_count_block(config, hypothesis, b, n) for b, n in jobs)
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        counts = pool.map(lambda job: _count_block(config, hypothesis, *job), jobs)
        return sum(counts)


def simulate(config: SimConfig) -> SimReport:
    """Estimate root error probabilities by simulating every sensor."""
    alpha_hat = _count_errors(config, 0) / config.trials
    beta_hat = _count_errors(config, 1) / config.trials
    return SimReport(
        alpha_hat=alpha_hat,
        beta_hat=beta_hat,
        trials=config.trials,
        half_width_alpha=half_width(alpha_hat, config.trials),
        half_width_beta=half_width(beta_hat, config.trials),
        analytic=apply_strategy(config.initial, config.strategy),
    )


def _log_step(la: float, lb: float, rule: FusionRule) -> tuple[float, float]:
    # log of x * (2 - x) is log x + log(2 - x); exp underflow to 0 is harmless
    if rule is FusionRule.A:
        return la + math.log(2.0 - math.exp(la)), 2.0 * lb
    return 2.0 * la, lb + math.log(2.0 - math.exp(lb))


def _log_greedy_rule(la: float, lb: float, priors: Priors) -> FusionRule:
    if priors.equal:
        # same relative tie band as core.ulrt_rules
        hi, lo = max(la, lb), min(la, lb)
        if -math.expm1(lo - hi) <= TIE_EPS:
            return FusionRule.A
        return FusionRule.A if lb > la else FusionRule.O
    # A beats O iff p1 * b * (1 - b) > p0 * a * (1 - a); ties go to A
    score_a = math.log(priors.p1) + lb + math.log1p(-math.exp(lb)) if priors.p1 > 0 else -math.inf
    score_o = math.log(priors.p0) + la + math.log1p(-math.exp(la)) if priors.p0 > 0 else -math.inf
    return FusionRule.O if score_o > score_a else FusionRule.A


def log_decay_profile(
    initial: ErrorState, max_h: int, priors: Priors = EQUAL_PRIORS
) -> list[tuple[int, float]]:
    """(h, log L_h) along the greedy strategy, for h = 0..max_h.

    Carried in log space: L_h falls like exp(-c * 2**(h/2)) and leaves the
    float64 range after about 20 levels.
    """
    require_regime(initial)
    if not 0 <= max_h <= MAX_DECAY_HEIGHT:
        raise ValueError(f"max_h must be in [0, {MAX_DECAY_HEIGHT}], got {max_h}")
    if initial.alpha == 0.0 or initial.beta == 0.0:
        raise ValueError("log profile needs alpha > 0 and beta > 0")
    la, lb = math.log(initial.alpha), math.log(initial.beta)
    lp0 = math.log(priors.p0) if priors.p0 > 0 else -math.inf
    lp1 = math.log(priors.p1) if priors.p1 > 0 else -math.inf
    out = []
    for h in range(max_h + 1):
        out.append((h, float(np.logaddexp(lp0 + la, lp1 + lb))))
        if h < max_h:
            la, lb = _log_step(la, lb, _log_greedy_rule(la, lb, priors))
    return out


def decay_profile(
    initial: ErrorState, max_h: int, priors: Priors = EQUAL_PRIORS
) -> list[tuple[int, float]]:
    """(h, total error) along the greedy strategy. Values may underflow to 0."""
    if initial.alpha == 0.0 or initial.beta == 0.0:
        # no log space with a zero error; the plain recursion is exact here
        states = trajectory(initial, greedy_strategy(initial, max_h, priors).strategy)
        return [(h, total_error(s, priors)) for h, s in enumerate(states)]
    return [(h, math.exp(lv)) for h, lv in log_decay_profile(initial, max_h, priors)]


def decay_ratios(log_profile: list[tuple[int, float]]) -> dict[int, float]:
    """log L_{h+2} / log L_h for even h; tends to 2 when -log L grows like sqrt(N)."""
    logs = dict(log_profile)
    return {h: logs[h + 2] / logs[h] for h in sorted(logs) if h % 2 == 0 and h + 2 in logs and logs[h] != 0}
