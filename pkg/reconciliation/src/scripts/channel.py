"""
Binary-input symmetric channels seen by Bob: the BSC of discrete-variable QKD
and the BIAWGN channel of continuous-variable QKD.

Conventions: an LLR is ln(P(y|0) / P(y|1)), positive values favour bit 0. The
BIAWGN channel maps bit b to the unit-energy symbol 1 - 2b and adds Gaussian
noise of variance 1 / snr.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import ClassVar, Protocol

import numpy as np
from scipy import integrate, special

from .errors import ChannelParameterError

LLR_SATURATION: float = 30.0

# Simpson grid of the BIAWGN capacity integral, 2^14 intervals.
CAPACITY_POINTS: int = 2 ** 14 + 1
CAPACITY_SPAN_SIGMAS: float = 10.0

Seed = int | np.random.Generator


class ChannelKind(Enum):
    BSC = 0
    BIAWGN = 1

    def __str__(self) -> str:
        return self._name_.lower()


class ChannelModel(Protocol):
    """Protocol class for the quantum-channel abstractions."""

    kind: ChannelKind

    @property
    def parameter(self) -> float:
        """The single real parameter of the channel (p or snr)."""

    def capacity(self) -> float:
        """Capacity of the channel in bits per use."""

    def transmit(self, bits: np.ndarray, seed: Seed) -> np.ndarray:
        """Returns Bob's observations of the given bits."""

    def llr(self, observations: np.ndarray) -> np.ndarray:
        """Per-symbol LLRs of the observations, saturated at LLR_SATURATION."""


def rng_from(seed: Seed) -> np.random.Generator:
    """Seeds a PCG64 generator, or passes an existing generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def block_rng(seed: int, block_id: int) -> np.random.Generator:
    """Independent RNG stream for one block (or one Monte-Carlo trial) of a run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block_id])))


@dataclass(frozen=True)
class Bsc:
    """Binary symmetric channel with crossover probability p (the QBER)."""
    p: float
    kind: ClassVar[ChannelKind] = ChannelKind.BSC

    def __post_init__(self) -> None:
        if not 0.0 <= self.p < 0.5:
            raise ChannelParameterError('p', self.p, '0 <= p < 0.5')

    def __str__(self) -> str:
        return f'bsc:{self.p:g}'

    @property
    def parameter(self) -> float:
        return self.p

    @property
    def llr_magnitude(self) -> float:
        """|ln((1 - p) / p)|, saturated; infinite information is capped like any LLR."""
        if self.p == 0.0:
            return LLR_SATURATION
        return min(math.log((1.0 - self.p) / self.p), LLR_SATURATION)

    def capacity(self) -> float:
        return 1.0 - binary_entropy(self.p)

    def transmit(self, bits: np.ndarray, seed: Seed) -> np.ndarray:
        rng = rng_from(seed)
        flips = rng.random(bits.size) < self.p
        return np.bitwise_xor(bits.astype(np.uint8), flips.astype(np.uint8))

    def llr(self, observations: np.ndarray) -> np.ndarray:
        signs = 1.0 - 2.0 * np.asarray(observations, dtype=np.float64)
        return signs * self.llr_magnitude


@dataclass(frozen=True)
class BiAwgn:
    """Binary-input AWGN channel, snr = Es / sigma^2 with Es = 1."""
    snr: float
    kind: ClassVar[ChannelKind] = ChannelKind.BIAWGN

    def __post_init__(self) -> None:
        if not (self.snr > 0.0 and math.isfinite(self.snr)):
            raise ChannelParameterError('snr', self.snr, 'a finite snr > 0')

    def __str__(self) -> str:
        return f'biawgn:{self.snr:g}'

    @property
    def parameter(self) -> float:
        return self.snr

    @property
    def sigma(self) -> float:
        return math.sqrt(1.0 / self.snr)

    def capacity(self) -> float:
        """
        Binary-input AWGN capacity, 1 - E[log2(1 + exp(-L))] under bit 0, integrated
        with Simpson's rule over +-10 sigma around the symbol.
        :return: capacity in bits per channel use
        """
        sigma = self.sigma
        y = np.linspace(1.0 - CAPACITY_SPAN_SIGMAS * sigma, 1.0 + CAPACITY_SPAN_SIGMAS * sigma,
                        CAPACITY_POINTS)
        density = np.exp(-0.5 * ((y - 1.0) / sigma) ** 2) / (sigma * math.sqrt(2.0 * math.pi))
        loss = np.logaddexp(0.0, -2.0 * y * self.snr) / math.log(2.0)
        value = 1.0 - integrate.simpson(density * loss, x=y)
        return float(min(max(value, 0.0), 1.0))

    def transmit(self, bits: np.ndarray, seed: Seed) -> np.ndarray:
        rng = rng_from(seed)
        symbols = 1.0 - 2.0 * bits.astype(np.float64)
        return symbols + rng.normal(0.0, self.sigma, bits.size)

    def llr(self, observations: np.ndarray) -> np.ndarray:
        values = 2.0 * np.asarray(observations, dtype=np.float64) * self.snr
        return np.clip(values, -LLR_SATURATION, LLR_SATURATION)


CHANNEL_PATTERN = re.compile(r'^(?P<kind>bsc|biawgn):(?P<value>[0-9]*\.?[0-9]+(e-?[0-9]+)?)$')


def parse_channel(spec: str) -> Bsc | BiAwgn:
    """
    Creates a channel from its command-line form, 'bsc:<p>' or 'biawgn:<snr>'.
    Raises a ValueError if provided string is of wrong format, and a
    ChannelParameterError if the parameter is out of range.
    """
    match = CHANNEL_PATTERN.match(spec.strip().lower())
    if match is None:
        raise ValueError(f"Channel must be of format 'bsc:<p>' or 'biawgn:<snr>', {spec!r} was provided")
    return make_channel(ChannelKind[match['kind'].upper()], float(match['value']))


def make_channel(kind: ChannelKind, parameter: float) -> Bsc | BiAwgn:
    if kind is ChannelKind.BSC:
        return Bsc(parameter)
    return BiAwgn(parameter)


def binary_entropy(p: float | np.ndarray) -> float | np.ndarray:
    """
    Binary entropy h(p) in bits, with h(0) = h(1) = 0.
    :param p: probability or array of probabilities in [0, 1]
    :return: entropy of the same shape
    """
    values = np.asarray(p, dtype=np.float64)
    if np.any((values < 0.0) | (values > 1.0)) or np.any(np.isnan(values)):
        raise ChannelParameterError('p', p, '0 <= p <= 1')
    entropy = (special.entr(values) + special.entr(1.0 - values)) / math.log(2.0)
    return float(entropy) if entropy.ndim == 0 else entropy


def gaussian_mutual_information(snr: float) -> float:
    """I(x:y) = 0.5 log2(1 + snr) of the Gaussian-modulated CVQKD channel."""
    if not snr > 0.0:
        raise ChannelParameterError('snr', snr, 'snr > 0')
    return 0.5 * math.log2(1.0 + snr)


def capacity(channel: ChannelModel) -> float:
    return channel.capacity()


def transmit(channel: ChannelModel, bits: np.ndarray, seed: Seed) -> np.ndarray:
    """
    Sends bits through the channel, deterministically for a given seed.
    :param channel: BSC or BIAWGN channel
    :param bits: nonempty uint8 vector of 0/1 values
    :param seed: integer seed or an already seeded generator
    :return: received bits (BSC) or real samples (BIAWGN)
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size == 0:
        raise ValueError('Cannot transmit an empty block')
    return channel.transmit(bits, seed)


def channel_llr(channel: ChannelModel, observations: np.ndarray | float) -> np.ndarray | float:
    values = channel.llr(np.asarray(observations))
    return float(values) if np.ndim(values) == 0 else values


def inverse_binary_entropy(h: np.ndarray) -> np.ndarray:
    """Smallest p in [0, 0.5] with h(p) = h, by interpolation on a fine table."""
    return np.interp(h, _ENTROPY_TABLE, _ENTROPY_GRID)


_ENTROPY_GRID = np.linspace(0.0, 0.5, 20001)
_ENTROPY_TABLE = binary_entropy(_ENTROPY_GRID)


def write_observations(path: Path, channel: ChannelModel, observations: np.ndarray) -> None:
    """Appends one block of observations: packed bits for BSC, little-endian f64 for BIAWGN."""
    with open(path, 'ab') as handle:
        handle.write(_encode_observations(channel, observations))


def read_observations(path: Path, channel: ChannelModel, block_size: int, block_id: int) -> np.ndarray:
    """
    Reads block number block_id back from an observation file.
    :param path: file written by write_observations (or captured externally)
    :param channel: channel the observations belong to, selects the encoding
    :param block_size: N, number of symbols per block
    :param block_id: zero-based block index in the file
    :return: observations of one block
    """
    if channel.kind is ChannelKind.BSC:
        return read_packed_bits(path, block_size, block_id)
    raw = _read_slice(path, block_id * block_size * 8, block_size * 8)
    return np.frombuffer(raw, dtype='<f8').astype(np.float64)


def _encode_observations(channel: ChannelModel, observations: np.ndarray) -> bytes:
    if channel.kind is ChannelKind.BSC:
        return np.packbits(observations.astype(np.uint8), bitorder='little').tobytes()
    return observations.astype('<f8').tobytes()


def _read_slice(path: Path, offset: int, size: int) -> bytes:
    with open(path, 'rb') as handle:
        handle.seek(offset)
        raw = handle.read(size)
    if len(raw) != size:
        raise EOFError(f'{path} holds no complete block at offset {offset}')
    return raw


def append_packed_bits(path: Path, bits: np.ndarray) -> None:
    """Appends one bit block, packed LSB first; raw key files use this layout."""
    with open(path, 'ab') as handle:
        handle.write(np.packbits(np.asarray(bits, dtype=np.uint8), bitorder='little').tobytes())


def read_packed_bits(path: Path, block_size: int, block_id: int) -> np.ndarray:
    stride = math.ceil(block_size / 8)
    raw = _read_slice(path, block_id * stride, stride)
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=block_size, bitorder='little')
