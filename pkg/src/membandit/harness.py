"""Experiment orchestration: golden arm, accuracy sweeps, report export.

A full experiment determines the reference ("golden") arm by exhaustive
uniform sampling at a fixed per-arm budget, then measures how often each
policy reproduces that recommendation across independently seeded runs at
several total-budget multipliers.  Every run seed is derived from the
master seed with a 64-bit mixing function, so a report is a pure function
of its configuration.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import bandits
from .bandits import BanditStats, RewardEnvironment, recommend
from .config import ExperimentConfig
from .designspace import enumerate_architectures
from .environments import MemoryEnvironment, SyntheticEnvironment, nominal_normalizer

__all__ = [
    "POLICY_FUNCS",
    "POLICY_IDS",
    "GOLDEN_STREAM_ID",
    "GoldenResult",
    "CellResult",
    "AccuracyReport",
    "derive_seed",
    "golden_arm",
    "build_memory_environment",
    "build_synthetic_environment",
    "run_experiment",
    "export_report",
    "CSV_HEADER",
]

POLICY_FUNCS: dict[str, Callable] = {
    "uniform": bandits.run_uniform,
    "sr": bandits.run_successive_rejects,
    "ucbe_auto": bandits.run_adaptive_ucbe,
    "ugape_auto": bandits.run_adaptive_ugape,
}

POLICY_IDS = {name: i for i, name in enumerate(POLICY_FUNCS)}
GOLDEN_STREAM_ID = 255  # reserved policy slot for the baseline stream

CSV_HEADER = "policy,budget_multiplier,correct_ratio,stderr,total_pulls,wall_ms"

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    """splitmix64 finalizer; avalanche over 64 bits."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed: int, policy_id: int, multiplier_index: int,
                repetition_index: int) -> int:
    """Platform-independent 64-bit stream seed for one run.

    Each tuple field is avalanched and folded in turn, so tuples differing
    in any single field land on unrelated seeds.
    """
    h = _mix64(master_seed & _MASK64)
    for part in (policy_id, multiplier_index, repetition_index):
        h = _mix64(h ^ _mix64(part & _MASK64))
    return h


class _CountingEnvironment(RewardEnvironment):
    """Pass-through wrapper counting pulls."""

    def __init__(self, inner: RewardEnvironment):
        self.inner = inner
        self.pulls = 0

    @property
    def n_arms(self) -> int:
        return self.inner.n_arms

    def pull(self, arm: int, rng: np.random.Generator) -> float:
        self.pulls += 1
        return self.inner.pull(arm, rng)


@dataclass(frozen=True)
class GoldenResult:
    """Baseline recommendation plus the full per-arm mean-reward table."""

    arm: int
    mean_rewards: np.ndarray
    pulls_per_arm: int

    @property
    def total_pulls(self) -> int:
        return self.pulls_per_arm * len(self.mean_rewards)


def golden_arm(env: RewardEnvironment, pulls_per_arm: int,
               rng: np.random.Generator) -> GoldenResult:
    """Exhaustive baseline: every arm pulled ``pulls_per_arm`` times."""
    if pulls_per_arm < 1:
        raise ValueError(f"pulls_per_arm must be >= 1, got {pulls_per_arm}")
    stats = BanditStats(env.n_arms)
    for arm in range(env.n_arms):
        for _ in range(pulls_per_arm):
            stats.update(arm, env.pull(arm, rng))
    return GoldenResult(arm=recommend(stats),
                        mean_rewards=stats.means(),
                        pulls_per_arm=pulls_per_arm)


@dataclass(frozen=True)
class CellResult:
    """Outcome of one (policy, multiplier) cell of the sweep."""

    policy: str
    multiplier: float
    correct_ratio: float
    stderr: float
    total_pulls: int  # pulls of a single run; identical across repetitions
    wall_ms: float


@dataclass(frozen=True)
class AccuracyReport:
    golden_arm: int
    n_arms: int
    repetitions: int
    master_seed: int
    cells: tuple[CellResult, ...]

    def cell(self, policy: str, multiplier: float) -> CellResult:
        for c in self.cells:
            if c.policy == policy and c.multiplier == multiplier:
                return c
        raise KeyError(f"no cell for ({policy}, {multiplier})")

    def to_dict(self) -> dict:
        return {
            "golden_arm": self.golden_arm,
            "n_arms": self.n_arms,
            "repetitions": self.repetitions,
            "master_seed": self.master_seed,
            "cells": [
                {
                    "policy": c.policy,
                    "budget_multiplier": c.multiplier,
                    "correct_ratio": round(c.correct_ratio, 4),
                    "stderr": round(c.stderr, 4),
                    "total_pulls": c.total_pulls,
                    "wall_ms": round(c.wall_ms, 1),
                }
                for c in self.cells
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AccuracyReport":
        cells = tuple(
            CellResult(
                policy=c["policy"],
                multiplier=c["budget_multiplier"],
                correct_ratio=c["correct_ratio"],
                stderr=c["stderr"],
                total_pulls=c["total_pulls"],
                wall_ms=c["wall_ms"],
            )
            for c in data["cells"]
        )
        return cls(golden_arm=data["golden_arm"], n_arms=data["n_arms"],
                   repetitions=data["repetitions"],
                   master_seed=data["master_seed"], cells=cells)


def build_memory_environment(config: ExperimentConfig) -> MemoryEnvironment:
    """Enumerate the design space and wrap it as a reward environment."""
    arms = enumerate_architectures(config.ranges)
    normalizer = nominal_normalizer(arms, config.tech, mode=config.normalizer_mode)
    return MemoryEnvironment(
        arms=arms,
        tech=config.tech,
        weights=config.weights,
        normalizer=normalizer,
        t_acc_target=config.t_acc_target,
        p_dyn_target=config.p_dyn_target,
        penalty=config.penalty,
    )


def build_synthetic_environment(config: ExperimentConfig) -> SyntheticEnvironment:
    """Synthetic bed from config, or the default 20-arm Gaussian ladder."""
    if config.synthetic_arms:
        return SyntheticEnvironment(config.synthetic_arms)
    return SyntheticEnvironment.linspace_bed(20, 0.25, 0.75, sd=0.3)


def run_experiment(config: ExperimentConfig,
                   env: RewardEnvironment | None = None) -> AccuracyReport:
    """Golden arm once, then R seeded runs per (policy, multiplier) cell."""
    if env is None:
        env = build_memory_environment(config)
    n_arms = env.n_arms
    golden_rng = np.random.default_rng(
        derive_seed(config.master_seed, GOLDEN_STREAM_ID, 0, 0))
    golden = golden_arm(env, config.baseline_pulls_per_arm, golden_rng)

    cells = []
    for policy_name in config.policies:
        policy = POLICY_FUNCS[policy_name]
        policy_id = POLICY_IDS[policy_name]
        for m_index, multiplier in enumerate(config.multipliers):
            budget = round(multiplier * n_arms)
            correct = 0
            run_pulls = 0
            start = time.perf_counter()
            for rep in range(config.repetitions):
                rng = np.random.default_rng(
                    derive_seed(config.master_seed, policy_id, m_index, rep))
                counter = _CountingEnvironment(env)
                if policy(counter, budget, rng) == golden.arm:
                    correct += 1
                if rep == 0:
                    run_pulls = counter.pulls
            wall_ms = (time.perf_counter() - start) * 1e3
            ratio = correct / config.repetitions
            stderr = math.sqrt(ratio * (1.0 - ratio) / config.repetitions)
            cells.append(CellResult(
                policy=policy_name,
                multiplier=multiplier,
                correct_ratio=ratio,
                stderr=stderr,
                total_pulls=run_pulls,
                wall_ms=wall_ms,
            ))
    return AccuracyReport(
        golden_arm=golden.arm,
        n_arms=n_arms,
        repetitions=config.repetitions,
        master_seed=config.master_seed,
        cells=tuple(cells),
    )


def _format_multiplier(m: float) -> str:
    return f"{m:g}"


def export_report(report: AccuracyReport, fmt: str, path: str | Path) -> None:
    """Serialize a report with a fixed field order and LF newlines."""
    path = Path(path)
    try:
        if fmt == "csv":
            with open(path, "w", newline="\n") as fh:
                fh.write(CSV_HEADER + "\n")
                for c in report.cells:
                    fh.write(
                        f"{c.policy},{_format_multiplier(c.multiplier)},"
                        f"{c.correct_ratio:.4f},{c.stderr:.4f},"
                        f"{c.total_pulls},{c.wall_ms:.1f}\n")
        elif fmt == "json":
            with open(path, "w", newline="\n") as fh:
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
        else:
            raise ValueError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


def load_report_csv(path: str | Path) -> list[dict]:
    """Parse an exported CSV back into row dictionaries (for tooling)."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
