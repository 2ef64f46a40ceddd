"""Shared test environments and helpers."""

import numpy as np
import pytest

from membandit.bandits import RewardEnvironment


class ConstantEnv(RewardEnvironment):
    """Deterministic arms: pulling arm i always yields rewards[i]."""

    def __init__(self, rewards):
        self.rewards = list(rewards)

    @property
    def n_arms(self):
        return len(self.rewards)

    def pull(self, arm, rng):
        return self.rewards[arm]


class ShiftedEnv(RewardEnvironment):
    """Adds a constant to every reward of the wrapped environment."""

    def __init__(self, inner, shift):
        self.inner = inner
        self.shift = shift

    @property
    def n_arms(self):
        return self.inner.n_arms

    def pull(self, arm, rng):
        return self.inner.pull(arm, rng) + self.shift


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
