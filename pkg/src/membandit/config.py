"""Experiment configuration: defaults, key=value files, validation.

Config files are flat ``key = value`` text; ``#`` starts a comment and
blank lines are ignored.  Lists are comma separated, exponent ranges are
``min,max`` pairs, and synthetic arms are ``mean:sd`` entries.  Any key
absent from the file keeps its default below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .circuit import DEVICE_CLASSES, CostWeights, DeviceParams, Technology, WireParams
from .designspace import EnumerationRanges

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "POLICY_NAMES",
    "default_technology",
    "default_ranges",
    "load_config",
    "parse_kv_file",
]

POLICY_NAMES = ("uniform", "sr", "ucbe_auto", "ugape_auto")

# 65 nm class defaults.  Thresholds and the supply grid follow the usual
# low-power corner set; drive and wire constants are chosen so that the
# desk-scale design space has a contested but identifiable optimum.
_TECH_DEFAULTS: dict[str, object] = {
    "vth0_volts": 0.195,
    "vth_sigma_ratio": 0.15,
    "alpha": 1.3,
    "pc": 1.0e-4,          # A per unit W/L at 1 V overdrive
    "pu": 0.5,             # V^(1 - alpha/2)
    "l_eff_m": 6.5e-8,
    "w_over_l_decoder": 8.0,
    "w_over_l_wordline": 12.0,
    "w_over_l_cell": 1.5,
    "w_over_l_sense_amp": 4.0,
    "w_over_l_output_driver": 16.0,
    "wire_r_per_m": 2.0e5,
    "wire_c_per_m": 2.0e-10,
    "pitch_m": 5.0e-7,
    "c_gate_f_per_m": 1.0e-9,
    "c_drain_f_per_m": 6.0e-10,
    "supply_levels": (0.8, 0.9, 1.0, 1.1),
}

_RANGE_DEFAULTS: dict[str, object] = {
    "capacity_bits": 65536,
    "banks_exp": (0, 3),
    "subbanks_exp": (0, 3),
    "mats_exp": (0, 3),
    "rows_exp": (4, 9),
    "cols_exp": (4, 9),
}


class ConfigError(ValueError):
    """Bad or inconsistent configuration; message names the field."""


def parse_kv_file(path: str | Path) -> dict[str, str]:
    """Read a flat key=value file into a string map."""
    entries: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def _as_float(raw: object, key: str) -> float:
    try:
        value = float(raw)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    return value


def _as_int(raw: object, key: str) -> int:
    try:
        return int(str(raw), 0)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _as_float_list(raw: object, key: str) -> tuple[float, ...]:
    if isinstance(raw, (tuple, list)):
        return tuple(float(x) for x in raw)
    parts = [p.strip() for p in str(raw).split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: expected a comma-separated list, got {raw!r}")
    return tuple(_as_float(p, key) for p in parts)


def _as_exp_range(raw: object, key: str) -> tuple[int, int]:
    if isinstance(raw, tuple):
        pair = raw
    else:
        parts = [p.strip() for p in str(raw).split(",")]
        if len(parts) != 2:
            raise ConfigError(f"{key}: expected 'min,max', got {raw!r}")
        pair = (_as_int(parts[0], key), _as_int(parts[1], key))
    return (int(pair[0]), int(pair[1]))


def _as_target(raw: object, key: str) -> float:
    if isinstance(raw, str) and raw.strip().lower() in ("inf", "none", ""):
        return math.inf
    return _as_float(raw, key)


def _as_synthetic_arms(raw: object, key: str) -> tuple[tuple[float, float], ...]:
    if isinstance(raw, tuple):
        return raw  # already parsed
    text = str(raw).strip()
    if not text:
        return ()
    arms = []
    for part in text.split(","):
        bits = part.strip().split(":")
        if len(bits) not in (1, 2):
            raise ConfigError(f"{key}: expected 'mean[:sd]', got {part!r}")
        mean = _as_float(bits[0], key)
        sd = _as_float(bits[1], key) if len(bits) == 2 else 0.0
        if sd < 0:
            raise ConfigError(f"{key}: sd must be non-negative, got {sd}")
        arms.append((mean, sd))
    return tuple(arms)


def default_technology(overrides: Mapping[str, object] | None = None) -> Technology:
    """Build the device/wire block, applying any overridden keys."""
    vals = dict(_TECH_DEFAULTS)
    if overrides:
        for key, raw in overrides.items():
            if key not in vals:
                continue
            if key == "supply_levels":
                vals[key] = _as_float_list(raw, key)
            else:
                vals[key] = _as_float(raw, key)
    vth0 = float(vals["vth0_volts"])  # type: ignore[arg-type]
    sigma_ratio = float(vals["vth_sigma_ratio"])  # type: ignore[arg-type]
    l_eff = float(vals["l_eff_m"])  # type: ignore[arg-type]
    try:
        devices = {
            name: DeviceParams(
                w=float(vals[f"w_over_l_{name}"]) * l_eff,  # type: ignore[arg-type]
                l_eff=l_eff,
                p_c=float(vals["pc"]),  # type: ignore[arg-type]
                p_u=float(vals["pu"]),  # type: ignore[arg-type]
                alpha=float(vals["alpha"]),  # type: ignore[arg-type]
                v_th=vth0,
            )
            for name in DEVICE_CLASSES
        }
        wire = WireParams(
            r_per_len=float(vals["wire_r_per_m"]),  # type: ignore[arg-type]
            c_per_len=float(vals["wire_c_per_m"]),  # type: ignore[arg-type]
            pitch=float(vals["pitch_m"]),  # type: ignore[arg-type]
            c_gate=float(vals["c_gate_f_per_m"]),  # type: ignore[arg-type]
            c_drain=float(vals["c_drain_f_per_m"]),  # type: ignore[arg-type]
        )
        return Technology(
            devices=devices,
            wire=wire,
            supply_levels=tuple(vals["supply_levels"]),  # type: ignore[arg-type]
            vth_sigma=sigma_ratio * vth0,
        )
    except ValueError as exc:
        raise ConfigError(f"technology block: {exc}") from exc


def default_ranges(overrides: Mapping[str, object] | None = None) -> EnumerationRanges:
    vals = dict(_RANGE_DEFAULTS)
    if overrides:
        for key, raw in overrides.items():
            if key == "capacity_bits":
                vals[key] = _as_int(raw, key)
            elif key in vals:
                vals[key] = _as_exp_range(raw, key)
    try:
        return EnumerationRanges(**vals)  # type: ignore[arg-type]
    except ValueError as exc:
        raise ConfigError(f"design space: {exc}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a full accuracy experiment needs, seed included."""

    ranges: EnumerationRanges = field(default_factory=default_ranges)
    tech: Technology = field(default_factory=default_technology)
    weights: CostWeights = field(default_factory=lambda: CostWeights(0.5, 0.5))
    penalty: float = 10.0
    t_acc_target: float = math.inf
    p_dyn_target: float = math.inf
    normalizer_mode: str = "fixed"
    policies: tuple[str, ...] = POLICY_NAMES
    multipliers: tuple[float, ...] = (10.0, 15.0, 20.0)
    baseline_pulls_per_arm: int = 100
    repetitions: int = 1000
    master_seed: int = 0
    synthetic_arms: tuple[tuple[float, float], ...] = ()
    out_path: str = ""
    out_format: str = "csv"

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError(f"repetitions: must be >= 1, got {self.repetitions}")
        if self.baseline_pulls_per_arm < 1:
            raise ConfigError(
                f"baseline_pulls_per_arm: must be >= 1, "
                f"got {self.baseline_pulls_per_arm}")
        if any(m < 1 for m in self.multipliers):
            raise ConfigError(f"multipliers: must all be >= 1, got {self.multipliers}")
        if not self.policies:
            raise ConfigError("policies: need at least one policy")
        for p in self.policies:
            if p not in POLICY_NAMES:
                raise ConfigError(
                    f"policies: unknown policy {p!r}, choose from {POLICY_NAMES}")
        if self.normalizer_mode not in ("fixed", "running"):
            raise ConfigError(
                f"normalizer_mode: must be 'fixed' or 'running', "
                f"got {self.normalizer_mode!r}")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(
                f"format: must be 'csv' or 'json', got {self.out_format!r}")
        if self.penalty < 0:
            raise ConfigError(f"lambda: must be non-negative, got {self.penalty}")
        if self.t_acc_target <= 0 or self.p_dyn_target <= 0:
            raise ConfigError("targets: must be positive (or inf)")


def load_config(path: str | Path | None = None,
                overrides: Mapping[str, object] | None = None) -> ExperimentConfig:
    """Assemble a config from defaults, an optional file, and overrides.

    Overrides use the same keys as the file and take precedence; they come
    from command-line flags.
    """
    entries: dict[str, object] = {}
    if path is not None:
        entries.update(parse_kv_file(path))
    if overrides:
        entries.update({k: v for k, v in overrides.items() if v is not None})

    tech = default_technology(entries)
    ranges = default_ranges(entries)

    weights = CostWeights(0.5, 0.5)
    if "weights" in entries:
        pair = _as_float_list(entries["weights"], "weights")
        if len(pair) != 2:
            raise ConfigError(f"weights: expected 'w_t,w_pdyn', got {entries['weights']!r}")
        try:
            weights = CostWeights(*pair)
        except ValueError as exc:
            raise ConfigError(f"weights: {exc}") from exc

    policies: tuple[str, ...] = POLICY_NAMES
    if "policies" in entries:
        raw = entries["policies"]
        if isinstance(raw, tuple):
            policies = raw
        else:
            policies = tuple(p.strip() for p in str(raw).split(",") if p.strip())

    def pick(key: str, default, conv):
        return conv(entries[key], key) if key in entries else default

    return ExperimentConfig(
        ranges=ranges,
        tech=tech,
        weights=weights,
        penalty=pick("lambda", 10.0, _as_float),
        t_acc_target=pick("t_acc_target", math.inf, _as_target),
        p_dyn_target=pick("p_dyn_target", math.inf, _as_target),
        normalizer_mode=str(entries.get("normalizer_mode", "fixed")),
        policies=policies,
        multipliers=pick("multipliers", (10.0, 15.0, 20.0), _as_float_list),
        baseline_pulls_per_arm=pick("baseline_pulls_per_arm", 100, _as_int),
        repetitions=pick("repetitions", 1000, _as_int),
        master_seed=pick("master_seed", 0, _as_int),
        synthetic_arms=pick("synthetic_arms", (), _as_synthetic_arms),
        out_path=str(entries.get("out", "")),
        out_format=str(entries.get("format", "csv")),
    )
