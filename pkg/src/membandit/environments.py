"""Reward environments: stochastic cost pulls and synthetic test beds.

A pull of the memory environment draws one set of operating conditions
(supply pair uniform over the level grid, per-class thresholds from a
truncated normal), evaluates the arm's access time and dynamic energy
under that draw, and returns the negated weighted cost so that the best
arm is the one with minimum expected cost.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .bandits import RewardEnvironment
from .circuit import (
    InfeasibleOperatingPointError,
    Normalizer,
    PerfMetrics,
    Technology,
    VariationSample,
    CostWeights,
    build_critical_path,
    build_switched_loads,
    cost,
    path_delay,
    switched_energy,
    update_normalizer,
)

__all__ = [
    "TRUNCATION_SIGMAS",
    "MAX_RESAMPLES",
    "InfeasibleSampleError",
    "sample_variation",
    "nominal_sample",
    "nominal_normalizer",
    "MemoryEnvironment",
    "SyntheticEnvironment",
    "RecordingEnvironment",
]

TRUNCATION_SIGMAS = 3.0
MAX_RESAMPLES = 8


class InfeasibleSampleError(RuntimeError):
    """Resampling could not produce feasible operating conditions."""


def sample_variation(rng: np.random.Generator, tech: Technology) -> VariationSample:
    """Draw one set of operating conditions.

    Both supply rails are chosen independently and uniformly from the level
    grid; each device class gets a threshold from a normal around its
    nominal value, redrawn until it falls within the truncation band.
    """
    levels = tech.supply_levels
    pick = rng.integers(0, len(levels), size=2)
    sigma = tech.vth_sigma
    band = TRUNCATION_SIGMAS * sigma
    draws = rng.standard_normal(len(tech.class_names)).tolist()
    vth = {}
    for name, mu, z in zip(tech.class_names, tech.nominal_vths, draws):
        x = mu + sigma * z
        while abs(x - mu) > band:
            x = mu + sigma * rng.standard_normal()
        vth[name] = x
    return VariationSample(
        vdd_periph=levels[pick[0]],
        vdd_cell=levels[pick[1]],
        vth_by_class=vth,
    )


def nominal_sample(tech: Technology) -> VariationSample:
    """No-variation draw: nominal thresholds, both rails at the top level."""
    top = max(tech.supply_levels)
    return VariationSample(
        vdd_periph=top,
        vdd_cell=top,
        vth_by_class={c: d.v_th for c, d in tech.devices.items()},
    )


def nominal_normalizer(arms: Sequence, tech: Technology,
                       mode: str = "fixed") -> Normalizer:
    """Reference minima from a nominal sweep of the whole design space.

    Running mode ignores the sweep and starts unbounded, ratcheting down
    as the search observes metrics.
    """
    if mode == "running":
        return Normalizer.running()
    theta = nominal_sample(tech)
    min_t = math.inf
    min_p = math.inf
    for arch in arms:
        min_t = min(min_t, path_delay(build_critical_path(arch, tech), theta, tech))
        min_p = min(min_p, switched_energy(build_switched_loads(arch, tech), theta))
    return Normalizer(min_t_acc=min_t, min_p_dyn=min_p, mode="fixed")


class MemoryEnvironment(RewardEnvironment):
    """Arms are memory organizations; a pull is one Monte Carlo trial.

    Reward is ``-(cost + penalty * excess)`` where ``excess`` charges the
    fractional overrun of the access-time / energy targets (zero when the
    targets are infinite).  Stage capacitances are precomputed per arm, so
    a pull costs one variation draw plus a handful of scalar updates.
    """

    def __init__(self, arms: Sequence, tech: Technology, weights: CostWeights,
                 normalizer: Normalizer | None = None,
                 t_acc_target: float = math.inf,
                 p_dyn_target: float = math.inf,
                 penalty: float = 10.0):
        if not arms:
            raise ValueError("environment needs a non-empty arm list")
        if penalty < 0:
            raise ValueError(f"penalty must be non-negative, got {penalty}")
        if t_acc_target <= 0 or p_dyn_target <= 0:
            raise ValueError("targets must be positive")
        self.arms = list(arms)
        self.tech = tech
        self.weights = weights
        self.normalizer = (normalizer if normalizer is not None
                           else nominal_normalizer(self.arms, tech))
        self.t_acc_target = t_acc_target
        self.p_dyn_target = p_dyn_target
        self.penalty = penalty
        self._paths = [build_critical_path(a, tech) for a in self.arms]
        self._loads = [build_switched_loads(a, tech) for a in self.arms]

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    def evaluate(self, arm: int, theta: VariationSample) -> PerfMetrics:
        """Metrics of one arm under explicit operating conditions."""
        return PerfMetrics(
            t_acc=path_delay(self._paths[arm], theta, self.tech),
            p_dyn=switched_energy(self._loads[arm], theta),
        )

    def pull(self, arm: int, rng: np.random.Generator) -> float:
        for _ in range(1 + MAX_RESAMPLES):
            theta = sample_variation(rng, self.tech)
            try:
                metrics = self.evaluate(arm, theta)
            except InfeasibleOperatingPointError:
                continue
            break
        else:
            raise InfeasibleSampleError(
                f"no feasible draw for arm {arm} after {MAX_RESAMPLES} retries")
        if self.normalizer.mode == "running":
            update_normalizer(self.normalizer, metrics)
        value = cost(metrics, self.weights, self.normalizer)
        excess = 0.0
        if math.isfinite(self.t_acc_target):
            excess += max(metrics.t_acc / self.t_acc_target - 1.0, 0.0)
        if math.isfinite(self.p_dyn_target):
            excess += max(metrics.p_dyn / self.p_dyn_target - 1.0, 0.0)
        return -(value + self.penalty * excess)


class SyntheticEnvironment(RewardEnvironment):
    """Gaussian (or constant) arms for validating the policies."""

    def __init__(self, specs: Sequence[tuple[float, float]]):
        if not specs:
            raise ValueError("environment needs a non-empty arm list")
        self._means = np.array([m for m, _ in specs], dtype=np.float64)
        self._sds = np.array([s for _, s in specs], dtype=np.float64)
        if np.any(self._sds < 0):
            raise ValueError("arm standard deviations must be non-negative")

    @classmethod
    def linspace_bed(cls, n_arms: int, lo: float, hi: float,
                     sd: float) -> "SyntheticEnvironment":
        """Evenly spaced means from lo to hi, shared noise level."""
        means = np.linspace(lo, hi, n_arms)
        return cls([(float(m), sd) for m in means])

    @property
    def n_arms(self) -> int:
        return len(self._means)

    @property
    def means(self) -> np.ndarray:
        return self._means.copy()

    def pull(self, arm: int, rng: np.random.Generator) -> float:
        sd = self._sds[arm]
        if sd == 0.0:
            return float(self._means[arm])
        # mean + sd * z keeps the underlying draw independent of the spec,
        # so shifting all means shifts rewards without changing the stream
        return float(self._means[arm] + sd * rng.standard_normal())


class RecordingEnvironment(RewardEnvironment):
    """Wrapper capturing the (arm, reward) sequence of a run."""

    def __init__(self, inner: RewardEnvironment):
        self.inner = inner
        self.trace: list[tuple[int, float]] = []

    @property
    def n_arms(self) -> int:
        return self.inner.n_arms

    @property
    def arms_pulled(self) -> list[int]:
        return [arm for arm, _ in self.trace]

    def pull(self, arm: int, rng: np.random.Generator) -> float:
        reward = self.inner.pull(arm, rng)
        self.trace.append((arm, reward))
        return reward
