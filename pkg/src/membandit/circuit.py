"""Circuit-level access time, dynamic energy, and cost for a memory organization.

Everything here is deterministic: given one draw of threshold voltages and
supply levels (a ``VariationSample``), the model produces scalar metrics.
Randomness lives in :mod:`membandit.environments`.

Delay model
    Gate delays use the step-response RC estimate ``0.69 * R_eff * C`` with
    the effective resistance ``R_eff = V_DD / I_eff``, where ``I_eff`` is
    the drain current averaged over the switching interval,
    ``(I(V_GS=V_DD, V_DS=V_DD/2) + I(V_GS=V_DD/2, V_DS=V_DD)) / 2``.
    Drain current follows the velocity-saturated power law

        I_DS = 0                                          V_GS <= V_th
             = (W/L) * (P_c/P_u) * Vov^(a/2) * V_DS       V_DS <  V_d0
             = (W/L) * P_c * Vov^a                        V_DS >= V_d0

    with overdrive ``Vov = V_GS - V_th`` and the saturation boundary
    ``V_d0 = P_u * Vov^(a/2)``; the two branches meet continuously at
    ``V_d0``.  Exponent ``a`` defaults to 1.3 (65 nm class devices).

Critical path
    The access path is composed of six stages, each a driver class and a
    lumped switched capacitance:

    1. address/data H-tree: one repeater stage per bank-doubling plus one
       per sub-bank-doubling, wire length ~ sqrt(area of the unit routed
       into);
    2. row predecode/decode: log2(n_rows) gate stages;
    3. wordline: driver loaded by the row wire plus one access-gate per
       column;
    4. bitline discharge: cell access device (cell supply domain) loaded
       by the column wire plus one drain junction per row;
    5. sense amplifier (fixed load);
    6. output driver (fixed load).

    Dynamic energy sums ``0.5 * C * V^2`` over the switched loads, with
    every mat of the accessed sub-bank activated and one sub-array per
    mat carrying the accessed word slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

__all__ = [
    "DEVICE_CLASSES",
    "DeviceParams",
    "WireParams",
    "Technology",
    "VariationSample",
    "PerfMetrics",
    "CostWeights",
    "Normalizer",
    "PathStage",
    "InfeasibleOperatingPointError",
    "InvalidSampleError",
    "ids_alpha_power",
    "i_eff",
    "r_eff",
    "build_critical_path",
    "path_delay",
    "access_time",
    "access_time_breakdown",
    "build_switched_loads",
    "switched_energy",
    "dynamic_power",
    "cost",
    "update_normalizer",
]

RC_LN2 = 0.69  # step-response constant for one RC stage

# Device classes along the access path; the bitline cell access device is
# powered from the cell supply, everything else from the peripheral supply.
DEVICE_CLASSES = ("decoder", "wordline", "cell", "sense_amp", "output_driver")
CELL_DOMAIN_CLASSES = frozenset({"cell"})


class InfeasibleOperatingPointError(ValueError):
    """Supply at or below threshold: the device cannot source current."""


class InvalidSampleError(ValueError):
    """A metric came out non-finite or non-positive."""


@dataclass(frozen=True)
class DeviceParams:
    """Power-law transistor parameters for one device class.

    w, l_eff      channel width / effective length (m)
    p_c           current constant, A per unit W/L at 1 V overdrive
    p_u           saturation-voltage constant (V^(1 - alpha/2))
    alpha         velocity-saturation exponent, 1 (fully saturated) .. 2
    v_th          nominal threshold voltage (V)
    """

    w: float
    l_eff: float
    p_c: float
    p_u: float
    alpha: float
    v_th: float

    def __post_init__(self) -> None:
        for name in ("w", "l_eff", "p_c", "p_u"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 1.0 <= self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in [1, 2], got {self.alpha}")
        if self.v_th <= 0:
            raise ValueError(f"v_th must be positive, got {self.v_th}")

    @property
    def w_over_l(self) -> float:
        return self.w / self.l_eff


@dataclass(frozen=True)
class WireParams:
    """Interconnect and loading constants.

    r_per_len  wire resistance (ohm/m); kept with the wire description for
               completeness, the lumped stage delay charges all capacitance
               through the driver resistance only
    c_per_len  wire capacitance (F/m)
    pitch      cell pitch (m); row/column wire spans are counts * pitch
    c_gate     gate capacitance per metre of transistor width (F/m)
    c_drain    drain junction capacitance per metre of width (F/m)
    """

    r_per_len: float
    c_per_len: float
    pitch: float
    c_gate: float
    c_drain: float

    def __post_init__(self) -> None:
        for name in ("r_per_len", "c_per_len", "pitch", "c_gate", "c_drain"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


@dataclass(frozen=True)
class Technology:
    """Device classes, interconnect, supply grid, threshold spread."""

    devices: Mapping[str, DeviceParams]
    wire: WireParams
    supply_levels: tuple[float, ...] = (0.8, 0.9, 1.0, 1.1)
    vth_sigma: float = 0.15 * 0.195

    def __post_init__(self) -> None:
        missing = [c for c in DEVICE_CLASSES if c not in self.devices]
        if missing:
            raise ValueError(f"missing device classes: {missing}")
        if not self.supply_levels or any(v <= 0 for v in self.supply_levels):
            raise ValueError("supply_levels must be positive")
        if self.vth_sigma <= 0:
            raise ValueError("vth_sigma must be positive")
        # cached per-class views for the sampling hot path
        names = tuple(self.devices)
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "nominal_vths",
                           tuple(self.devices[c].v_th for c in names))


@dataclass(frozen=True)
class VariationSample:
    """One draw of operating conditions: supply pair plus per-class V_th."""

    vdd_periph: float
    vdd_cell: float
    vth_by_class: Mapping[str, float]

    def supply_for(self, device_class: str) -> float:
        return self.vdd_cell if device_class in CELL_DOMAIN_CLASSES else self.vdd_periph


@dataclass(frozen=True)
class PerfMetrics:
    """Access time (s) and switched energy per access (J)."""

    t_acc: float
    p_dyn: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.t_acc) and self.t_acc > 0):
            raise InvalidSampleError(f"t_acc must be finite positive, got {self.t_acc}")
        if not (math.isfinite(self.p_dyn) and self.p_dyn > 0):
            raise InvalidSampleError(f"p_dyn must be finite positive, got {self.p_dyn}")


@dataclass(frozen=True)
class CostWeights:
    """Relative importance of access time vs dynamic energy; sums to one."""

    w_t: float
    w_pdyn: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.w_t <= 1.0 and 0.0 <= self.w_pdyn <= 1.0):
            raise ValueError("weights must lie in [0, 1]")
        if abs(self.w_t + self.w_pdyn - 1.0) > 1e-12:
            raise ValueError(
                f"weights must sum to 1, got {self.w_t} + {self.w_pdyn}")


@dataclass
class Normalizer:
    """Reference minima dividing raw metrics into dimensionless ratios.

    ``fixed`` mode keeps the minima constant (stationary rewards);
    ``running`` mode ratchets them down as better metrics are seen.
    """

    min_t_acc: float
    min_p_dyn: float
    mode: str = "fixed"

    def __post_init__(self) -> None:
        if self.min_t_acc <= 0 or self.min_p_dyn <= 0:
            raise ValueError("normalizer minima must be positive")
        if self.mode not in ("fixed", "running"):
            raise ValueError(f"mode must be 'fixed' or 'running', got {self.mode!r}")

    @classmethod
    def running(cls) -> "Normalizer":
        return cls(min_t_acc=math.inf, min_p_dyn=math.inf, mode="running")


# ---------------------------------------------------------------------------
# device equations


def _ids(w_over_l: float, p_c: float, p_u: float, alpha: float,
         v_th: float, v_gs: float, v_ds: float) -> float:
    vov = v_gs - v_th
    if vov <= 0.0:
        return 0.0
    half = vov ** (alpha * 0.5)
    v_d0 = p_u * half
    if v_ds < v_d0:
        return w_over_l * (p_c / p_u) * half * v_ds
    # vov^alpha as half*half keeps the branches exactly continuous at v_d0
    return w_over_l * p_c * half * half


def ids_alpha_power(v_gs: float, v_ds: float, dev: DeviceParams) -> float:
    """Drain current (A) at the given gate/drain bias."""
    if v_gs < 0 or v_ds < 0:
        raise ValueError(f"bias voltages must be non-negative, got ({v_gs}, {v_ds})")
    return _ids(dev.w_over_l, dev.p_c, dev.p_u, dev.alpha, dev.v_th, v_gs, v_ds)


def _i_eff(w_over_l: float, p_c: float, p_u: float, alpha: float,
           v_th: float, v_dd: float) -> float:
    if v_dd <= v_th:
        raise InfeasibleOperatingPointError(
            f"supply {v_dd} V at or below threshold {v_th} V")
    half = 0.5 * v_dd
    i_high = _ids(w_over_l, p_c, p_u, alpha, v_th, v_dd, half)
    i_low = _ids(w_over_l, p_c, p_u, alpha, v_th, half, v_dd)
    return 0.5 * (i_high + i_low)


def i_eff(dev: DeviceParams, v_dd: float) -> float:
    """Switching-interval average drive current (A) at supply ``v_dd``."""
    return _i_eff(dev.w_over_l, dev.p_c, dev.p_u, dev.alpha, dev.v_th, v_dd)


def r_eff(dev: DeviceParams, v_dd: float) -> float:
    """Effective driver resistance (ohm): supply over average current."""
    return v_dd / i_eff(dev, v_dd)


# ---------------------------------------------------------------------------
# critical path construction


@dataclass(frozen=True)
class PathStage:
    """One lumped stage of the access path."""

    name: str
    device_class: str
    cap: float  # total switched capacitance, F


def _log2i(x: int) -> int:
    return x.bit_length() - 1


def build_critical_path(arch, tech: Technology) -> tuple[PathStage, ...]:
    """Lump the six access-path stages of ``arch`` into (class, cap) pairs.

    Stage capacitances depend only on geometry, so the result can be cached
    and reused across variation draws.
    """
    wire = tech.wire
    w_dec = tech.devices["decoder"].w
    w_wl = tech.devices["wordline"].w
    w_cell = tech.devices["cell"].w
    w_sense = tech.devices["sense_amp"].w
    w_out = tech.devices["output_driver"].w

    row_span = arch.n_rows * wire.pitch
    col_span = arch.n_cols * wire.pitch
    subarray_area = row_span * col_span
    mat_area = 4.0 * subarray_area
    subbank_area = arch.n_mats * mat_area
    bank_area = arch.n_subbanks * subbank_area
    total_area = arch.n_banks * bank_area

    # H-tree: every bank doubling adds a repeater on the global bus, whose
    # wires span the die; every sub-bank doubling adds a local repeater
    # spanning one sub-bank; a terminal hop delivers address/data across the
    # destination sub-bank to its mats.  The bank/sub-bank asymmetry
    # reflects banks owning their own address/data buses while sub-banks
    # share the in-bank tree.
    repeater_cap = wire.c_drain * w_out + wire.c_gate * w_out
    htree_cap = wire.c_per_len * math.sqrt(subbank_area) + repeater_cap
    htree_cap += _log2i(arch.n_banks) * (wire.c_per_len * math.sqrt(total_area) + repeater_cap)
    htree_cap += _log2i(arch.n_subbanks) * (wire.c_per_len * math.sqrt(subbank_area) + repeater_cap)

    decode_cap = (_log2i(arch.n_rows) * (wire.c_drain + wire.c_gate) * w_dec
                  + wire.c_gate * w_wl)
    wordline_cap = (wire.c_per_len * col_span
                    + arch.n_cols * wire.c_gate * w_cell
                    + wire.c_drain * w_wl)
    bitline_cap = (wire.c_per_len * row_span
                   + arch.n_rows * wire.c_drain * w_cell
                   + wire.c_gate * w_sense)
    sense_cap = wire.c_drain * w_sense + wire.c_gate * w_out
    output_cap = (wire.c_drain + wire.c_gate) * w_out

    return (
        PathStage("htree", "output_driver", htree_cap),
        PathStage("decode", "decoder", decode_cap),
        PathStage("wordline", "wordline", wordline_cap),
        PathStage("bitline", "cell", bitline_cap),
        PathStage("sense", "sense_amp", sense_cap),
        PathStage("output", "output_driver", output_cap),
    )


def _class_resistances(theta: VariationSample, tech: Technology) -> dict[str, float]:
    res = {}
    for name, dev in tech.devices.items():
        v_dd = theta.supply_for(name)
        v_th = theta.vth_by_class[name]
        res[name] = v_dd / _i_eff(dev.w_over_l, dev.p_c, dev.p_u,
                                  dev.alpha, v_th, v_dd)
    return res

def path_delay(path: tuple[PathStage, ...], theta: VariationSample,
               tech: Technology) -> float:
    """Total RC delay (s) of a prebuilt path under one variation draw."""
    res = _class_resistances(theta, tech)
    total = 0.0
    for stage in path:
        total += RC_LN2 * res[stage.device_class] * stage.cap
    return total


def access_time(arch, theta: VariationSample, tech: Technology) -> float:
    """Access time (s) of ``arch`` for one variation draw."""
    return path_delay(build_critical_path(arch, tech), theta, tech)


def access_time_breakdown(arch, theta: VariationSample,
                          tech: Technology) -> dict[str, float]:
    """Per-stage delay contributions (s); sums to ``access_time``."""
    res = _class_resistances(theta, tech)
    return {s.name: RC_LN2 * res[s.device_class] * s.cap
            for s in build_critical_path(arch, tech)}


# ---------------------------------------------------------------------------
# dynamic energy


@dataclass(frozen=True)
class SwitchedLoads:
    """Activated capacitance per supply domain for one access."""

    c_periph: float
    c_cell: float


def build_switched_loads(arch, tech: Technology) -> SwitchedLoads:
    """Total switched capacitance per domain; all mats of the accessed
    sub-bank activate, one sub-array per mat."""
    path = {s.name: s.cap for s in build_critical_path(arch, tech)}
    per_mat_periph = path["decode"] + path["wordline"] + path["sense"]
    c_periph = path["htree"] + arch.n_mats * per_mat_periph + path["output"]
    c_cell = arch.n_mats * path["bitline"]
    return SwitchedLoads(c_periph=c_periph, c_cell=c_cell)


def switched_energy(loads: SwitchedLoads, theta: VariationSample) -> float:
    """Dynamic energy per access (J): 0.5 C V^2 summed over domains."""
    return 0.5 * (loads.c_periph * theta.vdd_periph ** 2
                  + loads.c_cell * theta.vdd_cell ** 2)


def dynamic_power(arch, theta: VariationSample, tech: Technology) -> float:
    """Per-access dynamic energy (J) of ``arch`` for one variation draw."""
    return switched_energy(build_switched_loads(arch, tech), theta)


# ---------------------------------------------------------------------------
# cost


def cost(metrics: PerfMetrics, weights: CostWeights, norm: Normalizer) -> float:
    """Weighted sum of normalized access time and dynamic energy."""
    if not (math.isfinite(metrics.t_acc) and math.isfinite(metrics.p_dyn)):
        raise InvalidSampleError(f"non-finite metrics: {metrics}")
    return (weights.w_t * (metrics.t_acc / norm.min_t_acc)
            + weights.w_pdyn * (metrics.p_dyn / norm.min_p_dyn))


def update_normalizer(norm: Normalizer, metrics: PerfMetrics) -> Normalizer:
    """Fold ``metrics`` into a running normalizer; no-op in fixed mode."""
    if norm.mode == "running":
        norm.min_t_acc = min(norm.min_t_acc, metrics.t_acc)
        norm.min_p_dyn = min(norm.min_p_dyn, metrics.p_dyn)
    return norm
