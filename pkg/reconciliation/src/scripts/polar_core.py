"""
Polar transform and successive-cancellation decoding, in a float64 reference
form and a saturating 16/8 fixed-point form driven by the phi lookup table.

The decoder walks the decoding tree without call recursion. LLRs and partial
sums live in stage-indexed buffers of 2N - 1 entries: depth d (node length
N >> d) starts at offset 2N - (2N >> d), so the channel LLRs sit at offset 0 and
the leaf at 2N - 2. Index conventions are those of the construction module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np

from .construction import PolarCode
from .errors import CodeMismatchError
from .fixed_point import fixed_check_node, fixed_variable_node, phi_table, to_fixed


class Representation(Enum):
    FLOAT64 = 'float'
    FIXED_POINT = 'fixed'

    def __str__(self) -> str:
        return self.value


def _check_length(size: int) -> None:
    if size < 1 or size & (size - 1):
        raise ValueError(f'Block length must be a power of two, {size} was provided')


@dataclass(frozen=True, eq=False)
class LlrBlock:
    """
    Decoder input: float64 LLRs, or int16 words in the fixed-point format
    (saturated on conversion, never wrapped).
    """
    values: np.ndarray
    representation: Representation = Representation.FLOAT64

    def __post_init__(self) -> None:
        _check_length(self.values.size)
        expected = np.float64 if self.representation is Representation.FLOAT64 else np.int16
        if self.values.dtype != expected:
            raise TypeError(f'{self.representation} LLRs must be {np.dtype(expected)}, got {self.values.dtype}')

    @classmethod
    def from_float(cls, values: np.ndarray, representation: Representation = Representation.FLOAT64) -> LlrBlock:
        if representation is Representation.FIXED_POINT:
            return cls(to_fixed(values), representation)
        return cls(np.ascontiguousarray(values, dtype=np.float64), representation)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class BitBlock:
    bits: np.ndarray

    def __post_init__(self) -> None:
        _check_length(self.bits.size)

    def __len__(self) -> int:
        return self.bits.size

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BitBlock):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)


def polar_transform(u: BitBlock | np.ndarray) -> BitBlock:
    """
    x = u F^{(x)n} over GF(2) in natural order, by in-place butterflies.
    The transform is its own inverse.
    """
    bits = np.array(u.bits if isinstance(u, BitBlock) else u, dtype=np.uint8)
    _check_length(bits.size)
    half = 1
    while half < bits.size:
        pairs = bits.reshape(-1, 2, half)
        pairs[:, 0, :] ^= pairs[:, 1, :]
        half *= 2
    return BitBlock(bits)


@numba.njit(cache=True, nogil=True)
def _phi(x):
    if x <= 0.0:
        return np.inf
    return math.log1p(2.0 / math.expm1(x))


@numba.njit(cache=True, nogil=True)
def _check_node(a, b):
    magnitude_a = abs(a)
    magnitude_b = abs(b)
    magnitude = min(_phi(_phi(magnitude_a) + _phi(magnitude_b)), magnitude_a, magnitude_b)
    if (a < 0.0) == (b < 0.0):
        return magnitude
    return -magnitude


@numba.njit(cache=True, nogil=True)
def _variable_node(a, b, s):
    if s == 0:
        return b + a
    return b - a


@numba.njit(cache=True, nogil=True)
def _top_depth(i, n):
    """Depth of the first node on the path of leaf i that differs from leaf i - 1."""
    if i == 0:
        return 1
    zeros = 0
    while (i & 1) == 0:
        i >>= 1
        zeros += 1
    return n - zeros


@numba.njit(cache=True, nogil=True)
def _propagate(i, bit, n, sums, rights):
    """
    Folds decision i into the partial sums. sums holds, per depth, the encoding of
    the last completed left node; rights the encoding of the right node under way.
    A completed right node merges with its sibling into the parent as [l ^ r, r].
    """
    size = 1 << n
    leaf = 2 * size - 2
    if (i & 1) == 0:
        sums[leaf] = bit
        return
    rights[leaf] = bit
    depth = n
    while True:
        length = size >> depth
        child = 2 * size - ((2 * size) >> depth)
        parent = 2 * size - ((2 * size) >> (depth - 1))
        target = sums if ((i >> (n - depth + 1)) & 1) == 0 else rights
        for j in range(length):
            target[parent + j] = sums[child + j] ^ rights[child + j]
            target[parent + length + j] = rights[child + j]
        if ((i >> (n - depth + 1)) & 1) == 0:
            return
        depth -= 1


@numba.njit(cache=True, nogil=True)
def _decode_float(channel, n, frozen_mask, frozen_bits, u, llrs, sums, rights):
    size = 1 << n
    for j in range(size):
        llrs[j] = channel[j]
    for i in range(size):
        top = _top_depth(i, n)
        if i > 0:
            length = size >> top
            parent = 2 * size - ((2 * size) >> (top - 1))
            child = 2 * size - ((2 * size) >> top)
            for j in range(length):
                llrs[child + j] = _variable_node(llrs[parent + j], llrs[parent + length + j], sums[child + j])
            top += 1
        for depth in range(top, n + 1):
            length = size >> depth
            parent = 2 * size - ((2 * size) >> (depth - 1))
            child = 2 * size - ((2 * size) >> depth)
            for j in range(length):
                llrs[child + j] = _check_node(llrs[parent + j], llrs[parent + length + j])
        if frozen_mask[i]:
            bit = frozen_bits[i]
        elif llrs[2 * size - 2] < 0.0:
            bit = 1
        else:
            bit = 0
        u[i] = bit
        _propagate(i, bit, n, sums, rights)


@numba.njit(cache=True, nogil=True)
def _decode_fixed(channel, n, frozen_mask, frozen_bits, u, llrs, sums, rights, table):
    size = 1 << n
    for j in range(size):
        llrs[j] = channel[j]
    for i in range(size):
        top = _top_depth(i, n)
        if i > 0:
            length = size >> top
            parent = 2 * size - ((2 * size) >> (top - 1))
            child = 2 * size - ((2 * size) >> top)
            for j in range(length):
                llrs[child + j] = fixed_variable_node(llrs[parent + j], llrs[parent + length + j], sums[child + j])
            top += 1
        for depth in range(top, n + 1):
            length = size >> depth
            parent = 2 * size - ((2 * size) >> (depth - 1))
            child = 2 * size - ((2 * size) >> depth)
            for j in range(length):
                llrs[child + j] = fixed_check_node(llrs[parent + j], llrs[parent + length + j], table)
        if frozen_mask[i]:
            bit = frozen_bits[i]
        elif llrs[2 * size - 2] < 0:
            bit = 1
        else:
            bit = 0
        u[i] = bit
        _propagate(i, bit, n, sums, rights)


class SuccessiveCancellationDecoder:
    """
    SC decoder bound to one code. An instance owns its scratch buffers and must
    not be shared between threads; the code itself is immutable and shareable.
    """

    def __init__(self, code: PolarCode, representation: Representation = Representation.FLOAT64) -> None:
        self.code = code
        self.representation = representation
        size = code.block_size
        dtype = np.float64 if representation is Representation.FLOAT64 else np.int16
        self._llrs = np.zeros(2 * size - 1, dtype=dtype)
        self._sums = np.zeros(2 * size - 1, dtype=np.uint8)
        self._rights = np.zeros(2 * size - 1, dtype=np.uint8)
        self._frozen_bits = np.zeros(size, dtype=np.uint8)
        self._frozen_mask = np.ascontiguousarray(code.frozen_mask)

    def decode(self, llrs: LlrBlock | np.ndarray, frozen_values: np.ndarray) -> BitBlock:
        """
        Decodes one block.
        :param llrs: channel LLRs; float arrays are quantized when the decoder is fixed point
        :param frozen_values: values of the frozen positions, in ascending index order
        :return: u-hat, frozen positions carrying exactly frozen_values
        """
        block = llrs if isinstance(llrs, LlrBlock) else LlrBlock.from_float(llrs, self.representation)
        if block.representation is not self.representation:
            if block.representation is Representation.FIXED_POINT:
                raise CodeMismatchError('A float decoder cannot take fixed-point LLRs')
            block = LlrBlock.from_float(block.values, self.representation)
        if len(block) != self.code.block_size:
            raise CodeMismatchError(f'Got {len(block)} LLRs for a code of length {self.code.block_size}')
        frozen_values = np.asarray(frozen_values, dtype=np.uint8)
        if frozen_values.size != self.code.frozen_count:
            raise CodeMismatchError(
                f'Got {frozen_values.size} frozen values for {self.code.frozen_count} frozen positions'
            )
        self._frozen_bits[:] = 0
        self._frozen_bits[self._frozen_mask] = frozen_values
        u = np.empty(self.code.block_size, dtype=np.uint8)
        if self.representation is Representation.FLOAT64:
            _decode_float(block.values, self.code.n, self._frozen_mask, self._frozen_bits, u,
                          self._llrs, self._sums, self._rights)
        else:
            _decode_fixed(block.values, self.code.n, self._frozen_mask, self._frozen_bits, u,
                          self._llrs, self._sums, self._rights, phi_table())
        return BitBlock(u)


def phi(x: float) -> float:
    """phi(x) = -ln(tanh(x / 2)) for x > 0; an involution on (0, inf)."""
    if not x > 0.0:
        raise ValueError(f'phi is defined for x > 0, {x} was provided')
    return float(_phi(float(x)))


def check_node(a: float, b: float) -> float:
    """f(a, b) = sign(a) sign(b) phi(phi(|a|) + phi(|b|))."""
    return float(_check_node(float(a), float(b)))


def variable_node(a: float, b: float, s: int) -> float:
    """g(a, b, s) = b + (1 - 2s) a."""
    return float(_variable_node(float(a), float(b), int(s)))


def sc_decode(code: PolarCode, llrs: LlrBlock | np.ndarray, frozen_values: np.ndarray) -> BitBlock:
    return SuccessiveCancellationDecoder(code).decode(llrs, frozen_values)


def sc_decode_fixed(code: PolarCode, llrs: LlrBlock | np.ndarray, frozen_values: np.ndarray) -> BitBlock:
    """Fixed-point SC decoding; float LLRs are quantized to the 16/8 format first."""
    return SuccessiveCancellationDecoder(code, Representation.FIXED_POINT).decode(llrs, frozen_values)
