"""Enumeration and validation of candidate memory organizations.

A candidate is a tuple of power-of-two unit counts (banks, sub-banks per
bank, mats per sub-bank, rows and columns per sub-array) tied together by
a fixed total capacity.  Every mat holds four identical sub-arrays, so

    n_banks * n_subbanks * n_mats * 4 * n_rows * n_cols == capacity_bits.

Enumeration order is lexicographic in (banks, subbanks, mats, rows, cols)
and therefore stable across runs; positions in the enumerated list serve
as arm indices elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

__all__ = [
    "SUBARRAYS_PER_MAT",
    "MemoryArchitecture",
    "EnumerationRanges",
    "EmptyDesignSpaceError",
    "enumerate_architectures",
    "validate_architecture",
]

SUBARRAYS_PER_MAT = 4


class EmptyDesignSpaceError(ValueError):
    """No tuple in the given ranges satisfies the capacity identity."""


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class MemoryArchitecture:
    n_banks: int
    n_subbanks: int
    n_mats: int
    n_rows: int
    n_cols: int
    capacity_bits: int

    @property
    def counts(self) -> tuple[int, int, int, int, int]:
        return (self.n_banks, self.n_subbanks, self.n_mats,
                self.n_rows, self.n_cols)

    def cell_count(self) -> int:
        b, s, m, r, c = self.counts
        return b * s * m * SUBARRAYS_PER_MAT * r * c


@dataclass(frozen=True)
class EnumerationRanges:
    """Inclusive power-of-two exponent bounds per organization field."""

    capacity_bits: int
    banks_exp: tuple[int, int] = (0, 3)
    subbanks_exp: tuple[int, int] = (0, 3)
    mats_exp: tuple[int, int] = (0, 3)
    rows_exp: tuple[int, int] = (4, 9)
    cols_exp: tuple[int, int] = (4, 9)

    def __post_init__(self) -> None:
        if not _is_pow2(self.capacity_bits):
            raise ValueError(
                f"capacity_bits must be a positive power of two, "
                f"got {self.capacity_bits}")
        for f in fields(self):
            if f.name == "capacity_bits":
                continue
            lo, hi = getattr(self, f.name)
            if lo < 0 or lo > hi:
                raise ValueError(
                    f"{f.name}: need 0 <= min <= max, got ({lo}, {hi})")

    def exponent_bounds(self) -> dict[str, tuple[int, int]]:
        return {
            "n_banks": self.banks_exp,
            "n_subbanks": self.subbanks_exp,
            "n_mats": self.mats_exp,
            "n_rows": self.rows_exp,
            "n_cols": self.cols_exp,
        }


def enumerate_architectures(ranges: EnumerationRanges) -> list[MemoryArchitecture]:
    """List every in-range tuple meeting the capacity identity.

    Raises EmptyDesignSpaceError when no tuple qualifies.
    """
    cap_exp = ranges.capacity_bits.bit_length() - 1
    out: list[MemoryArchitecture] = []
    b_lo, b_hi = ranges.banks_exp
    s_lo, s_hi = ranges.subbanks_exp
    m_lo, m_hi = ranges.mats_exp
    r_lo, r_hi = ranges.rows_exp
    c_lo, c_hi = ranges.cols_exp
    for eb in range(b_lo, b_hi + 1):
        for es in range(s_lo, s_hi + 1):
            for em in range(m_lo, m_hi + 1):
                for er in range(r_lo, r_hi + 1):
                    # column exponent is pinned by the capacity identity
                    ec = cap_exp - 2 - eb - es - em - er
                    if c_lo <= ec <= c_hi:
                        out.append(MemoryArchitecture(
                            n_banks=1 << eb,
                            n_subbanks=1 << es,
                            n_mats=1 << em,
                            n_rows=1 << er,
                            n_cols=1 << ec,
                            capacity_bits=ranges.capacity_bits,
                        ))
    if not out:
        raise EmptyDesignSpaceError(
            f"no architecture with capacity {ranges.capacity_bits} bits "
            f"fits the configured exponent ranges")
    return out


def validate_architecture(
    arch: MemoryArchitecture, ranges: EnumerationRanges
) -> tuple[bool, list[str]]:
    """Check every structural invariant; returns (ok, violations).

    Never raises: a malformed architecture yields a populated violation
    list instead.
    """
    violations: list[str] = []
    bounds = ranges.exponent_bounds()
    for name in ("n_banks", "n_subbanks", "n_mats", "n_rows", "n_cols"):
        value = getattr(arch, name)
        if not _is_pow2(value):
            violations.append(f"{name}={value} is not a power of two")
            continue
        lo, hi = bounds[name]
        exp = value.bit_length() - 1
        if not lo <= exp <= hi:
            violations.append(
                f"{name}={value} outside exponent range [{lo}, {hi}]")
    if arch.capacity_bits != ranges.capacity_bits:
        violations.append(
            f"capacity_bits={arch.capacity_bits} does not match the "
            f"range capacity {ranges.capacity_bits}")
    if arch.cell_count() != arch.capacity_bits:
        violations.append(
            f"capacity identity violated: counts give {arch.cell_count()} "
            f"bits, expected {arch.capacity_bits}")
    return (not violations, violations)
