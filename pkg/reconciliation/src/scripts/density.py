"""
Quantized LLR densities of symmetric binary-input channels.

A density is stored by the law of |L| only: mass[j] is the probability that
|L| = j * step for j = 0..M, and mass[M + 1] is the probability that |L| is
infinite. For a symmetric density the sign is implied, P(L < 0 | |L| = x) is
1 / (1 + e^x), so the hard-decision error probability, the Bhattacharyya
parameter and the capacity are all linear functionals of mass.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy import signal, stats

from .channel import BiAwgn, Bsc, ChannelKind, ChannelModel, binary_entropy
from .errors import QuantizationError

MIN_BINS: int = 256

# A base density with this much mass in one bin is not representable.
SINGLE_BIN_MASS: float = 1.0 - 1e-12


def _phi_extended(x: np.ndarray | float) -> np.ndarray | float:
    """phi extended to [0, inf]: phi(0) = inf and phi(inf) = 0."""
    with np.errstate(divide='ignore', over='ignore'):
        return np.log1p(2.0 / np.expm1(x))


@numba.njit(cache=True, nogil=True)
def _check_node_kernel(mass, run_ptr, run_bin, run_start, run_end, diagonal, out):
    size = mass.size
    cumulative = np.zeros(size + 1)
    for j in range(size):
        cumulative[j + 1] = cumulative[j] + mass[j]
    out[:] = 0.0
    for i in range(size):
        m_i = mass[i]
        if m_i == 0.0:
            continue
        out[diagonal[i]] += m_i * m_i
        for r in range(run_ptr[i], run_ptr[i + 1]):
            out[run_bin[r]] += 2.0 * m_i * (cumulative[run_end[r]] - cumulative[run_start[r]])


@dataclass(frozen=True, eq=False)
class DensityGrid:
    """
    Uniform grid on |L| with M = bins / 2 finite magnitudes over [0, llr_max] plus
    one infinite bin, and the precomputed tables of the two density transforms.
    """
    bins: int
    llr_max: float
    magnitudes: np.ndarray = field(repr=False)
    error_weight: np.ndarray = field(repr=False)
    bhattacharyya_weight: np.ndarray = field(repr=False)
    capacity_weight: np.ndarray = field(repr=False)
    positive_share: np.ndarray = field(repr=False)
    runs: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def half(self) -> int:
        return self.bins // 2

    @property
    def step(self) -> float:
        return self.llr_max / self.half

    @property
    def size(self) -> int:
        """Number of stored masses, finite magnitudes plus the infinite bin."""
        return self.half + 2

    @classmethod
    def build(cls, bins: int, llr_max: float) -> DensityGrid:
        half = bins // 2
        step = llr_max / half
        magnitudes = np.arange(half + 1) * step
        with np.errstate(over='ignore'):
            error_weight = np.append(1.0 / (1.0 + np.exp(magnitudes)), 0.0)
            bhattacharyya_weight = np.append(1.0 / np.cosh(magnitudes / 2.0), 0.0)
        capacity_weight = 1.0 - binary_entropy(error_weight)
        return cls(bins=bins, llr_max=llr_max, magnitudes=magnitudes, error_weight=error_weight,
                   bhattacharyya_weight=bhattacharyya_weight, capacity_weight=capacity_weight,
                   positive_share=1.0 - error_weight[1:half + 1], runs=_check_node_runs(magnitudes, step))

    def error_probability(self, mass: np.ndarray) -> float:
        """Hard-decision error probability, ties (L = 0) counted as one half."""
        return float(np.clip(mass @ self.error_weight, 0.0, 0.5))

    def bhattacharyya(self, mass: np.ndarray) -> float:
        return float(np.clip(mass @ self.bhattacharyya_weight, 0.0, 1.0))

    def capacity(self, mass: np.ndarray) -> float:
        return float(np.clip(mass @ self.capacity_weight, 0.0, 1.0))

    def check_node(self, mass: np.ndarray) -> np.ndarray:
        """Density of f(L1, L2) for two independent copies of the input density."""
        out = np.empty_like(mass)
        _check_node_kernel(mass, *self.runs, out)
        return out

    def variable_node(self, mass: np.ndarray) -> np.ndarray:
        """Density of L1 + L2 for two independent copies of the input density."""
        half = self.half
        finite = mass[1:half + 1]
        signed = np.concatenate((
            (finite * (1.0 - self.positive_share))[::-1],
            mass[:1],
            finite * self.positive_share,
        ))
        total = np.clip(signal.fftconvolve(signed, signed), 0.0, None)
        centre = 2 * half
        out = np.empty_like(mass)
        out[0] = total[centre]
        out[1:half + 1] = total[centre + 1:centre + half + 1] + total[centre - 1:centre - half - 1:-1]
        infinite = mass[-1]
        saturated = total[:centre - half].sum() + total[centre + half + 1:].sum()
        out[-1] = infinite * (2.0 - infinite) + saturated
        return out / out.sum()

    def base_density(self, channel: ChannelModel) -> np.ndarray:
        """
        Quantized |L| law of the base channel.
        :param channel: BSC or BIAWGN channel
        :return: mass vector of length self.size
        """
        if channel.kind is ChannelKind.BSC:
            return self._bsc_density(channel)
        mass = self._biawgn_density(channel)
        if mass.max() >= SINGLE_BIN_MASS:
            raise QuantizationError(str(channel), self.bins, self.llr_max)
        return mass

    def _bsc_density(self, channel: Bsc) -> np.ndarray:
        """Point mass at ln((1 - p) / p), split over the two enclosing bins so that the error probability is p."""
        mass = np.zeros(self.size)
        if channel.p == 0.0:
            mass[-1] = 1.0
            return mass
        magnitude = math.log((1.0 - channel.p) / channel.p)
        low = min(int(magnitude / self.step), self.half)
        high = low + 1
        weight_low, weight_high = self.error_weight[low], self.error_weight[high]
        if weight_low == weight_high:
            mass[low] = 1.0
            return mass
        share = float(np.clip((channel.p - weight_high) / (weight_low - weight_high), 0.0, 1.0))
        mass[low] += share
        mass[high] += 1.0 - share
        return mass

    def _biawgn_density(self, channel: BiAwgn) -> np.ndarray:
        """Bins the Gaussian law N(2 snr, 4 snr) of the BIAWGN LLR by magnitude."""
        mean = 2.0 * channel.snr
        deviation = 2.0 * math.sqrt(channel.snr)
        edges = np.append((np.arange(self.half + 1) + 0.5) * self.step, np.inf)
        edges = np.insert(edges, 0, 0.0)
        positive = _interval_mass(edges[:-1], edges[1:], mean, deviation)
        negative = _interval_mass(-edges[1:], -edges[:-1], mean, deviation)
        return positive + negative


def _interval_mass(low: np.ndarray, high: np.ndarray, mean: float, deviation: float) -> np.ndarray:
    """P(low <= X < high) for X ~ N(mean, deviation^2), using whichever tail keeps precision."""
    a = (low - mean) / deviation
    b = (high - mean) / deviation
    upper = stats.norm.sf(a) - stats.norm.sf(b)
    lower = stats.norm.cdf(b) - stats.norm.cdf(a)
    return np.clip(np.where(a > 0.0, upper, lower), 0.0, None)


def _check_node_runs(magnitudes: np.ndarray, step: float) -> tuple[np.ndarray, ...]:
    """
    Output-bin table of the check node, T[i, j] = min(i, j, round(f(x_i, x_j) / step)),
    stored as runs: for each row i, maximal ranges of j > i sharing one output bin.
    T is symmetric and nondecreasing along a row, so row i only holds a few runs.
    """
    half = magnitudes.size - 1
    infinite = half + 1
    phis = np.append(_phi_extended(magnitudes), 0.0)
    diagonal = np.empty(half + 2, dtype=np.int64)
    run_ptr = [0]
    run_bin: list[np.ndarray] = []
    run_start: list[np.ndarray] = []
    run_end: list[np.ndarray] = []
    for i in range(half + 1):
        diagonal[i] = min(i, int(np.rint(_phi_extended(2.0 * phis[i]) / step)))
        combined = _phi_extended(phis[i] + phis[i + 1:])
        combined[-1] = magnitudes[i]
        row = np.minimum(np.rint(combined / step).astype(np.int64), i)
        starts = np.concatenate(([0], np.flatnonzero(np.diff(row)) + 1))
        ends = np.append(starts[1:], row.size)
        run_bin.append(row[starts])
        run_start.append(starts + i + 1)
        run_end.append(ends + i + 1)
        run_ptr.append(run_ptr[-1] + starts.size)
    diagonal[infinite] = infinite
    run_ptr.append(run_ptr[-1])
    return (np.asarray(run_ptr, dtype=np.int64), np.concatenate(run_bin), np.concatenate(run_start),
            np.concatenate(run_end), diagonal)


@functools.lru_cache(maxsize=8)
def density_grid(bins: int, llr_max: float) -> DensityGrid:
    """Cached grid factory, one table build per (bins, llr_max)."""
    if bins < MIN_BINS or bins % 2:
        raise ValueError(f'Density grid needs an even bin count >= {MIN_BINS}, {bins} was provided')
    if not llr_max > 0.0:
        raise ValueError(f'Density grid needs a positive LLR range, {llr_max} was provided')
    return DensityGrid.build(bins, llr_max)
