"""
Saturating fixed-point LLRs and the phi lookup table of the fast decoder.

Format: signed 16-bit words with 8 fractional bits, symmetric saturation at
+-32767 (about +-128.0). The phi table holds 4096 entries on (0, 16], one per
LSB, so a magnitude indexes it directly; index 0 stands for phi(0) and holds the
largest representable value, magnitudes above 16 map to the last entry.

Table values carry 40 fractional bits: phi(x) is about 2 e^-x for large x, and
in Q8 it would round to 0 from x = 6.93 on, turning the check node into min-sum.
The inverse lookup returns the word nearest to phi^-1 of the summed values. When
both inputs exceed 8 the check node is evaluated on inputs shifted down to 8
and shifted back, f(a + c, b + c) = f(a, b) + c up to e^-16 relative terms.
"""
from __future__ import annotations

import functools

import numba
import numpy as np

TOTAL_BITS: int = 16
FRACTIONAL_BITS: int = 8
SCALE: int = 1 << FRACTIONAL_BITS
LIMIT: int = (1 << (TOTAL_BITS - 1)) - 1
PHI_TABLE_SIZE: int = 4096
PHI_TABLE_MAX: float = PHI_TABLE_SIZE / SCALE
PHI_FRACTIONAL_BITS: int = 40
PHI_SCALE: int = 1 << PHI_FRACTIONAL_BITS
PHI_LIMIT: int = LIMIT << (PHI_FRACTIONAL_BITS - FRACTIONAL_BITS)
# Inputs above this word are shifted down to it before the table lookups.
SHIFT_FLOOR: int = 8 * SCALE


def to_fixed(values: np.ndarray) -> np.ndarray:
    """Rounds float LLRs to the nearest representable word, saturating."""
    scaled = np.rint(np.asarray(values, dtype=np.float64) * SCALE)
    return np.clip(scaled, -LIMIT, LIMIT).astype(np.int16)


def to_float(values: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=np.float64) / SCALE


@functools.cache
def phi_table() -> np.ndarray:
    """phi(k / 256) for k = 0..4096 with 40 fractional bits, saturated at LIMIT, as int64."""
    x = np.arange(PHI_TABLE_SIZE + 1, dtype=np.float64) / SCALE
    with np.errstate(divide='ignore'):
        values = np.log1p(2.0 / np.expm1(x))
    table = np.minimum(np.rint(values * PHI_SCALE), PHI_LIMIT).astype(np.int64)
    table.setflags(write=False)
    return table


def table_phi(x: float) -> float:
    """Table phi of a real argument, the value the decoder actually uses."""
    index = min(int(np.rint(x * SCALE)), PHI_TABLE_SIZE)
    return float(phi_table()[max(index, 0)]) / PHI_SCALE


@numba.njit(cache=True, nogil=True)
def saturate(value):
    if value > LIMIT:
        return LIMIT
    if value < -LIMIT:
        return -LIMIT
    return value


@numba.njit(cache=True, nogil=True)
def inverse_phi(total, table):
    """Word k in 0..4096 whose table value is nearest to total."""
    if total >= table[0]:
        return 0
    if total <= table[PHI_TABLE_SIZE]:
        return PHI_TABLE_SIZE
    # table[low] > total >= table[high]
    low = 0
    high = PHI_TABLE_SIZE
    while high - low > 1:
        middle = (low + high) // 2
        if table[middle] > total:
            low = middle
        else:
            high = middle
    if table[low] - total < total - table[high]:
        return low
    return high


@numba.njit(cache=True, nogil=True)
def fixed_check_node(a, b, table):
    """f(a, b) = sign(a) sign(b) phi(phi(|a|) + phi(|b|)), bounded by min(|a|, |b|)."""
    magnitude_a = abs(np.int64(a))
    magnitude_b = abs(np.int64(b))
    shift = max(min(magnitude_a, magnitude_b) - SHIFT_FLOOR, 0)
    magnitude_a -= shift
    magnitude_b -= shift
    total = table[min(magnitude_a, PHI_TABLE_SIZE)] + table[min(magnitude_b, PHI_TABLE_SIZE)]
    magnitude = min(inverse_phi(total, table), magnitude_a, magnitude_b) + shift
    if (a < 0) == (b < 0):
        return magnitude
    return -magnitude


@numba.njit(cache=True, nogil=True)
def fixed_variable_node(a, b, s):
    if s == 0:
        return saturate(np.int32(b) + np.int32(a))
    return saturate(np.int32(b) - np.int32(a))
