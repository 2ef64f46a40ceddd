"""Fixed-budget best-arm identification policies.

An environment exposes ``n_arms`` and ``pull(arm, rng) -> float`` (reward,
larger is better).  A policy spends at most ``n`` pulls and returns the
index of the arm it believes has the highest mean reward.  Four policies
are provided:

* ``run_uniform``            round-robin baseline, exactly ``n`` pulls;
* ``run_successive_rejects`` phased elimination of the empirically worst
  arm, parameter free;
* ``run_adaptive_ucbe``      optimistic index policy whose exploration
  bonus is retuned per phase from an online hardness estimate;
* ``run_adaptive_ugape``     gap-index policy pulling the more uncertain
  of the two most contentious arms, exploration retuned every round.

All argmax/argmin decisions break ties toward the lowest arm index, so a
run is a deterministic function of (environment, budget, seeded generator).
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GAP_FLOOR",
    "EXPLORATION_FLOOR",
    "InvalidProblemError",
    "InsufficientBudgetError",
    "IncompleteExplorationError",
    "RewardEnvironment",
    "BanditStats",
    "SRSchedule",
    "log_bar",
    "sr_schedule",
    "ucbe_phase_bounds",
    "ucbe_score",
    "ucbe_complexity",
    "ugape_index",
    "recommend",
    "run_uniform",
    "run_successive_rejects",
    "run_adaptive_ucbe",
    "run_adaptive_ugape",
]

GAP_FLOOR = 1e-9          # floor for empirical gaps before inversion
EXPLORATION_FLOOR = 1e-12  # floor for the derived exploration parameter


class InvalidProblemError(ValueError):
    """Fewer than two arms: identification is vacuous."""


class InsufficientBudgetError(ValueError):
    """Budget too small to pull every arm at least once."""


class IncompleteExplorationError(RuntimeError):
    """An operation needing every arm sampled found an unpulled arm."""


class RewardEnvironment(ABC):
    """Stochastic arms; pulls are independent given the generator state."""

    @property
    @abstractmethod
    def n_arms(self) -> int: ...

    @abstractmethod
    def pull(self, arm: int, rng: np.random.Generator) -> float: ...


class BanditStats:
    """Per-arm pull counts and reward sums; means are computed on demand."""

    __slots__ = ("pull_counts", "reward_sums", "total_rounds")

    def __init__(self, n_arms: int):
        if n_arms < 1:
            raise InvalidProblemError(f"need at least one arm, got {n_arms}")
        self.pull_counts = np.zeros(n_arms, dtype=np.int64)
        self.reward_sums = np.zeros(n_arms, dtype=np.float64)
        self.total_rounds = 0

    @property
    def n_arms(self) -> int:
        return len(self.pull_counts)

    def update(self, arm: int, reward: float) -> None:
        self.pull_counts[arm] += 1
        self.reward_sums[arm] += reward
        self.total_rounds += 1

    def mean(self, arm: int) -> float:
        if self.pull_counts[arm] == 0:
            raise IncompleteExplorationError(f"arm {arm} has no pulls")
        return float(self.reward_sums[arm] / self.pull_counts[arm])

    def means(self) -> np.ndarray:
        """Empirical means; NaN where an arm has no pulls."""
        out = np.full(self.n_arms, np.nan)
        np.divide(self.reward_sums, self.pull_counts,
                  out=out, where=self.pull_counts > 0)
        return out


def recommend(stats: BanditStats) -> int:
    """Arm with the highest empirical mean; ties go to the lowest index."""
    if np.any(stats.pull_counts == 0):
        raise IncompleteExplorationError(
            "cannot recommend before every arm has been pulled")
    return int(np.argmax(stats.means()))


# ---------------------------------------------------------------------------
# phase schedule


def log_bar(n_arms: int) -> float:
    """Half plus the harmonic tail 1/2 + 1/3 + ... + 1/K."""
    if n_arms < 2:
        raise InvalidProblemError(f"need at least two arms, got {n_arms}")
    return 0.5 + sum(1.0 / i for i in range(2, n_arms + 1))


@dataclass(frozen=True)
class SRSchedule:
    """Cumulative per-arm pull targets for the K-1 elimination phases.

    ``n_k[k-1]`` is the number of pulls every arm still alive at the end
    of phase ``k`` has accumulated.  Phase pull totals never exceed the
    budget, and at most one round is left unspent.
    """

    n_arms: int
    budget: int
    log_bar_k: float
    n_k: tuple[int, ...]

    def phase_increments(self) -> tuple[int, ...]:
        prev = 0
        out = []
        for target in self.n_k:
            out.append(target - prev)
            prev = target
        return tuple(out)

    def total_pulls(self) -> int:
        return sum((self.n_arms - i) * inc
                   for i, inc in enumerate(self.phase_increments()))


def sr_schedule(n_arms: int, budget: int) -> SRSchedule:
    """Phase targets from the ceiling rule, adjusted to respect the budget.

    The raw targets are ``ceil((budget - K) / (log_bar(K) * (K + 1 - k)))``.
    Two adjustments keep every budget feasible and nearly fully used:
    the first phase always pulls each arm at least once, and leftover
    rounds (the ceiling rule can strand up to K) are folded into the final
    phase two at a time.  Should the targets ever overshoot the budget,
    phases are trimmed from the last one backwards.
    """
    if n_arms < 2:
        raise InvalidProblemError(f"need at least two arms, got {n_arms}")
    if budget < n_arms:
        raise InsufficientBudgetError(
            f"budget {budget} cannot cover {n_arms} arms once each")
    lb = log_bar(n_arms)
    targets = [math.ceil((budget - n_arms) / (lb * (n_arms + 1 - k)))
               for k in range(1, n_arms)]
    incs = [targets[0]] + [targets[i] - targets[i - 1]
                           for i in range(1, len(targets))]
    incs[0] = max(incs[0], 1)
    weights = [n_arms - i for i in range(len(incs))]  # arms alive in phase
    total = sum(w * m for w, m in zip(weights, incs))
    if total > budget:  # unreachable for the ceiling rule; guards any edit
        for i in range(len(incs) - 1, -1, -1):
            floor = 1 if i == 0 else 0
            cut = min(incs[i] - floor,
                      -((budget - total) // -weights[i]))  # ceil division
            incs[i] -= cut
            total -= weights[i] * cut
            if total <= budget:
                break
    slack = budget - total
    if slack >= 2:
        incs[-1] += slack // 2
    cum = np.cumsum(incs)
    return SRSchedule(n_arms=n_arms, budget=budget, log_bar_k=lb,
                      n_k=tuple(int(x) for x in cum))


def ucbe_phase_bounds(schedule: SRSchedule) -> tuple[int, ...]:
    """Round boundaries t_0..t_K partitioning the budget into K phases.

    ``t_1`` is K times the first phase target; later boundaries add the
    earlier targets plus the current target for each arm that could still
    be leading; the final boundary is the full budget.
    """
    k, nk = schedule.n_arms, schedule.n_k
    bounds = [0, k * nk[0]]
    for j in range(2, k):
        bounds.append(sum(nk[:j - 1]) + (k - j + 1) * nk[j - 1])
    bounds.append(schedule.budget)
    return tuple(bounds)


# ---------------------------------------------------------------------------
# policies


def run_uniform(env: RewardEnvironment, budget: int,
                rng: np.random.Generator) -> int:
    """Round-robin over arms (arm ``t mod K`` at round ``t``)."""
    n_arms = env.n_arms
    if budget < n_arms:
        raise InsufficientBudgetError(
            f"budget {budget} cannot cover {n_arms} arms once each")
    stats = BanditStats(n_arms)
    for t in range(budget):
        arm = t % n_arms
        stats.update(arm, env.pull(arm, rng))
    return recommend(stats)


def run_successive_rejects(env: RewardEnvironment, budget: int,
                           rng: np.random.Generator) -> int:
    """Eliminate the empirically worst surviving arm after each phase."""
    n_arms = env.n_arms
    schedule = sr_schedule(n_arms, budget)
    stats = BanditStats(n_arms)
    active = list(range(n_arms))
    for inc in schedule.phase_increments():
        for arm in active:
            for _ in range(inc):
                stats.update(arm, env.pull(arm, rng))
        means = stats.means()
        worst = min(active, key=lambda i: (means[i], i))
        active.remove(worst)
    return active[0]


def ucbe_score(mean: float, pulls: int, bonus: float) -> float:
    """Optimistic score ``mean + sqrt(bonus / pulls)``.

    Unpulled arms score +inf so each arm is tried before any repeat; a
    zero bonus reduces the score to the bare mean.
    """
    if pulls < 0:
        raise ValueError(f"pulls must be non-negative, got {pulls}")
    if bonus < 0:
        raise ValueError(f"bonus must be non-negative, got {bonus}")
    if pulls == 0:
        return math.inf
    if bonus == 0.0:
        return float(mean)
    return float(mean + math.sqrt(bonus / pulls))


def ucbe_complexity(stats: BanditStats, phase: int) -> float:
    """Hardness estimate from the ``phase`` largest inverse-squared gaps.

    Gaps to the best empirical mean are sorted ascending; the estimate is
    ``max(i * gap_(i)^-2)`` over the top ``phase`` positions.  Zero gaps
    are floored before inversion.
    """
    n_arms = stats.n_arms
    if not 1 <= phase <= n_arms - 1:
        raise ValueError(f"phase must lie in [1, {n_arms - 1}], got {phase}")
    if np.any(stats.pull_counts == 0):
        raise IncompleteExplorationError(
            "complexity estimate needs every arm pulled at least once")
    means = stats.means()
    gaps = np.sort(means.max() - means)
    gaps = np.maximum(gaps, GAP_FLOOR)
    lo = n_arms - phase + 1  # positions lo..K, 1-based
    positions = np.arange(lo, n_arms + 1, dtype=np.float64)
    return float(np.max(positions * gaps[lo - 1:] ** -2.0))


def run_adaptive_ucbe(env: RewardEnvironment, budget: int,
                      rng: np.random.Generator, *,
                      exploration: float | None = None) -> int:
    """Pull the best optimistic score each round, recalibrating per phase.

    Phase 0 assumes hardness equal to the arm count; every later phase
    re-estimates it from the gaps observed at the phase boundary and sets
    the bonus to ``budget / hardness``.  ``exploration`` pins the bonus to
    a fixed value instead (testing hook).
    """
    n_arms = env.n_arms
    schedule = sr_schedule(n_arms, budget)
    bounds = ucbe_phase_bounds(schedule)
    stats = BanditStats(n_arms)
    counts = stats.pull_counts
    sums = stats.reward_sums
    scores = np.full(n_arms, np.inf)
    for phase in range(n_arms):
        if exploration is not None:
            bonus = exploration
        elif phase == 0:
            bonus = budget / n_arms
        else:
            bonus = budget / ucbe_complexity(stats, phase)
        # rescore every arm under the new bonus
        pulled = counts > 0
        with np.errstate(divide="ignore"):
            scores = np.where(
                pulled, sums / np.maximum(counts, 1) + np.sqrt(bonus / counts),
                np.inf)
        for _ in range(bounds[phase], bounds[phase + 1]):
            arm = int(np.argmax(scores))
            stats.update(arm, env.pull(arm, rng))
            scores[arm] = (sums[arm] / counts[arm]
                           + math.sqrt(bonus / counts[arm]))
    return recommend(stats)


def _ugape_core(means: np.ndarray, counts: np.ndarray, exploration: float,
                work: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Index computation on raw arrays; ``work`` is a (3, K) scratch buffer."""
    beta, lower, b_index = work
    np.divide(exploration, counts, out=beta)
    np.sqrt(beta, out=beta)
    np.subtract(means, beta, out=lower)
    upper = beta  # reuse: beta is no longer needed once upper is formed
    np.add(means, upper, out=upper)
    top = int(np.argmax(upper))
    top_value = upper[top]
    upper[top] = -np.inf
    runner_up_pos = int(np.argmax(upper))
    runner_up_value = upper[runner_up_pos]
    upper[top] = top_value
    np.subtract(top_value, lower, out=b_index)
    b_index[top] = runner_up_value - lower[top]
    favourite = int(np.argmin(b_index))
    challenger = top if favourite != top else runner_up_pos
    return b_index, favourite, challenger


def ugape_index(stats: BanditStats, exploration: float
                ) -> tuple[np.ndarray, int, int]:
    """Gap indices plus the two candidate arms for the next pull.

    For each arm ``k``: ``B_k = max over others of upper bound - own lower
    bound`` with half-width ``sqrt(exploration / pulls)``.  Returns the
    index vector, the minimizer of B (the current favourite), and the
    highest upper bound among the rest (the challenger).  Ties resolve to
    the lowest arm index.
    """
    if exploration <= 0:
        raise ValueError(f"exploration must be positive, got {exploration}")
    if np.any(stats.pull_counts == 0):
        raise IncompleteExplorationError(
            "gap indices need every arm pulled at least once")
    work = np.empty((3, stats.n_arms))
    b_index, favourite, challenger = _ugape_core(
        stats.means(), stats.pull_counts.astype(np.float64),
        exploration, work)
    return b_index.copy(), favourite, challenger


def _ugape_exploration(means: np.ndarray, spare_budget: int,
                       gaps: np.ndarray) -> float:
    """Exploration parameter from a hardness sum of inverse-squared gaps.

    Each arm's gap is its distance to the best mean; the leader's own gap
    is its lead over the runner-up.  Halved gaps are floored, squared and
    inverted, summed into a hardness estimate, and the spare budget over
    that hardness gives the exploration strength.
    """
    top = int(np.argmax(means))
    top_value = means[top]
    means[top] = -np.inf
    runner_up = means.max()
    means[top] = top_value
    np.subtract(top_value, means, out=gaps)
    gaps[top] = top_value - runner_up
    gaps *= 0.5
    np.maximum(gaps, GAP_FLOOR, out=gaps)
    np.power(gaps, -2.0, out=gaps)
    hardness = float(gaps.sum())
    return max(spare_budget / hardness, EXPLORATION_FLOOR)


def run_adaptive_ugape(env: RewardEnvironment, budget: int,
                       rng: np.random.Generator, *,
                       exploration: float | None = None) -> int:
    """Pull the more uncertain of favourite and challenger each round.

    After one pass over all arms, every round re-derives the exploration
    parameter from the current hardness estimate (unless pinned via
    ``exploration``), computes the gap indices, and pulls whichever of the
    two candidate arms has the wider confidence interval.
    """
    n_arms = env.n_arms
    if n_arms < 2:
        raise InvalidProblemError(f"need at least two arms, got {n_arms}")
    if budget < n_arms:
        raise InsufficientBudgetError(
            f"budget {budget} cannot cover {n_arms} arms once each")
    stats = BanditStats(n_arms)
    counts = stats.pull_counts
    sums = stats.reward_sums
    for arm in range(n_arms):
        stats.update(arm, env.pull(arm, rng))
    means = sums / counts
    fcounts = counts.astype(np.float64)
    work = np.empty((3, n_arms))
    gaps = np.empty(n_arms)
    for _ in range(n_arms, budget):
        if exploration is None:
            a = _ugape_exploration(means, budget - n_arms, gaps)
        else:
            a = exploration
        _, favourite, challenger = _ugape_core(means, fcounts, a, work)
        first, second = ((favourite, challenger)
                         if favourite < challenger
                         else (challenger, favourite))
        if counts[first] <= counts[second]:
            arm = first  # wider interval, or tie broken low
        else:
            arm = second
        stats.update(arm, env.pull(arm, rng))
        fcounts[arm] = counts[arm]
        means[arm] = sums[arm] / counts[arm]
    return recommend(stats)
