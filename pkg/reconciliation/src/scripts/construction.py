"""
Polar code construction: per-synthetic-channel error probabilities by quantized
density evolution, then frozen-set selection under a union bound on the FER.

Index convention (shared with the decoder and the code tables): natural order of
x = u F^{(x)n}. The most significant bit of an index is the first split of the
recursion, 0 for the check-node (minus) channel and 1 for the variable-node
(plus) channel.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import stats

from .channel import BiAwgn, ChannelKind, ChannelModel, gaussian_mutual_information, inverse_binary_entropy
from .density import DensityGrid, density_grid
from .errors import CodeMismatchError

logger = logging.getLogger(__name__)

TOOL_VERSION: str = 'polar-qkd 1.0'

MAX_N: int = 27
DEFAULT_BINS: int = 2048
DEFAULT_LLR_MAX: float = 30.0

# A subtree is filled from its Bhattacharyya bound once the bound on the summed
# error probability of all its leaves is below this.
GOOD_SUBTREE_BUDGET: float = 1e-9
# A subtree is filled from its capacity bound once no leaf can carry more than this.
USELESS_SUBTREE_CAPACITY: float = 0.01


class ConstructionMethod(Enum):
    DENSITY_EVOLUTION = 'de'
    GAUSSIAN_APPROXIMATION = 'ga'

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Quantization:
    """Density-evolution grid descriptor."""
    bins: int = DEFAULT_BINS
    llr_max: float = DEFAULT_LLR_MAX

    def grid(self) -> DensityGrid:
        return density_grid(self.bins, self.llr_max)


# Recorded on codes built without a density grid.
GA_QUANTIZATION = Quantization(bins=0, llr_max=0.0)


@dataclass(frozen=True, eq=False)
class ConstructionResult:
    n: int
    channel: ChannelModel
    pe: np.ndarray = field(repr=False)
    quantization: Quantization
    method: ConstructionMethod = ConstructionMethod.DENSITY_EVOLUTION

    @property
    def block_size(self) -> int:
        return 1 << self.n


@dataclass(frozen=True)
class CodeMetadata:
    channel: ChannelModel
    target_fer: float
    quantization: Quantization
    tool_version: str = field(default=TOOL_VERSION, compare=False)


@dataclass(frozen=True, eq=False)
class PolarCode:
    """Block size 2^n and frozen mask (True = frozen), in natural index order."""
    n: int
    frozen_mask: np.ndarray = field(repr=False)
    metadata: CodeMetadata

    def __post_init__(self) -> None:
        if self.frozen_mask.shape != (1 << self.n,):
            raise CodeMismatchError(
                f'Frozen mask of length {self.frozen_mask.size} does not fit n={self.n}'
            )
        self.frozen_mask.setflags(write=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolarCode):
            return NotImplemented
        return (self.n == other.n and self.metadata == other.metadata
                and np.array_equal(self.frozen_mask, other.frozen_mask))

    @property
    def block_size(self) -> int:
        return 1 << self.n

    @property
    def frozen_indices(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask)

    @property
    def info_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.frozen_mask)

    @property
    def frozen_count(self) -> int:
        return int(np.count_nonzero(self.frozen_mask))

    @property
    def rate(self) -> float:
        return (self.block_size - self.frozen_count) / self.block_size


@dataclass(frozen=True)
class Efficiency:
    """beta against the reference information rate, beta_alt against BIAWGN capacity."""
    beta: float
    beta_alt: float | None = None


def density_evolution(channel: ChannelModel, n: int, quantization: Quantization = Quantization()
                      ) -> ConstructionResult:
    """
    Computes the genie-aided error probability of every synthetic channel.
    :param channel: base channel
    :param n: log2 of the block size, 1 <= n <= 27
    :param quantization: density grid; the base density must spread over more than one bin
    :return: construction result with pe indexed in decoding order
    """
    _check_n(n)
    grid = quantization.grid()
    pe = evolve(grid, grid.base_density(channel), n)
    return ConstructionResult(n=n, channel=channel, pe=pe, quantization=quantization)


def evolve(grid: DensityGrid, base: np.ndarray, n: int) -> np.ndarray:
    """
    Depth-first walk of the polarization tree with an explicit stack, so at most
    n + 1 densities are alive at any time.
    :param grid: density grid holding the transforms
    :param base: quantized |L| law of the base channel
    :param n: depth of the tree
    :return: pe of the 2^n leaves
    """
    pe = np.empty(1 << n)
    stack: list[tuple[int, int, np.ndarray]] = [(0, 0, base)]
    evaluated = good = useless = 0
    while stack:
        depth, index, mass = stack.pop()
        remaining = n - depth
        start, stop = index << remaining, (index + 1) << remaining
        evaluated += 1
        if remaining == 0:
            pe[start] = grid.error_probability(mass)
            continue
        z = grid.bhattacharyya(mass)
        if z * 2.0 ** (remaining - 1) <= GOOD_SUBTREE_BUDGET:
            pe[start:stop] = 0.5 * _bhattacharyya_leaves(z, remaining)
            good += 1
            continue
        information = grid.capacity(mass)
        if information * 2.0 ** remaining <= USELESS_SUBTREE_CAPACITY:
            pe[start:stop] = inverse_binary_entropy(1.0 - _capacity_leaves(information, remaining))
            useless += 1
            continue
        stack.append((depth + 1, 2 * index + 1, grid.variable_node(mass)))
        stack.append((depth + 1, 2 * index, grid.check_node(mass)))
        if depth <= 4:
            logger.debug('Density evolution at depth %d, node %d', depth, index)
    logger.info('Density evolution n=%d: %d densities evaluated, %d reliable and %d useless subtrees bounded',
                n, evaluated, good, useless)
    return np.clip(pe, 0.0, 0.5)


def _bhattacharyya_leaves(z: float, depth: int) -> np.ndarray:
    """Upper bounds Z(W-) <= 2Z - Z^2, Z(W+) = Z^2 pushed down `depth` levels."""
    values = np.array([z])
    for _ in range(depth):
        values = np.stack((2.0 * values - values ** 2, values ** 2), axis=1).ravel()
    return np.clip(values, 0.0, 1.0)


def _capacity_leaves(information: float, depth: int) -> np.ndarray:
    """Upper bounds I(W-) <= I, I(W+) <= 2I - I^2 pushed down `depth` levels."""
    values = np.array([information])
    for _ in range(depth):
        values = np.stack((values, 2.0 * values - values ** 2), axis=1).ravel()
    return np.clip(values, 0.0, 1.0)


def gaussian_approximation(channel: BiAwgn, n: int) -> ConstructionResult:
    """
    Fast Gaussian-approximation construction for the BIAWGN channel: each synthetic
    LLR is modelled as N(m, 2m) and only the mean is tracked.
    """
    _check_n(n)
    if channel.kind is not ChannelKind.BIAWGN:
        raise CodeMismatchError('The Gaussian approximation only applies to the BIAWGN channel')
    means = np.array([2.0 * channel.snr])
    for _ in range(n):
        worse = _ga_phi_inverse(1.0 - (1.0 - _ga_phi(means)) ** 2)
        means = np.stack((worse, 2.0 * means), axis=1).ravel()
    pe = stats.norm.sf(np.sqrt(means / 2.0))
    return ConstructionResult(n=n, channel=channel, pe=np.clip(pe, 0.0, 0.5), quantization=GA_QUANTIZATION,
                              method=ConstructionMethod.GAUSSIAN_APPROXIMATION)


def _ga_phi(x: np.ndarray) -> np.ndarray:
    """Chung's two-piece approximation of the mean-to-'phi' map of a consistent Gaussian LLR."""
    x = np.maximum(x, 1e-12)
    small = np.exp(-0.4527 * x ** 0.86 + 0.0218)
    large = np.sqrt(np.pi / x) * np.exp(-x / 4.0) * (1.0 - 10.0 / (7.0 * x))
    return np.clip(np.where(x < 10.0, small, large), 1e-300, 1.0)


def _ga_phi_inverse(y: np.ndarray) -> np.ndarray:
    """Inverse of _ga_phi, closed form on the first piece and bisection on the second."""
    y = np.clip(y, 1e-300, 1.0)
    small = ((0.0218 - np.log(y)) / 0.4527) ** (1.0 / 0.86)
    low, high = np.full_like(y, 10.0), np.full_like(y, 1e4)
    for _ in range(80):
        middle = 0.5 * (low + high)
        too_small = _ga_phi(middle) > y
        low = np.where(too_small, middle, low)
        high = np.where(too_small, high, middle)
    return np.where(y > _ga_phi(np.array([10.0]))[0], small, 0.5 * (low + high))


def select_frozen(result: ConstructionResult, target_fer: float) -> PolarCode:
    """
    Greedy information set: indices by ascending pe (ties by ascending index) while
    the union bound sum(pe[info]) stays <= target_fer; everything else is frozen.
    :param result: construction result
    :param target_fer: FER bound, 0 < target_fer < 1
    :return: polar code carrying the construction provenance
    """
    if not 0.0 < target_fer < 1.0:
        raise ValueError(f'Target FER must lie in (0, 1), {target_fer} was provided')
    order = np.argsort(result.pe, kind='stable')
    budget = np.cumsum(result.pe[order])
    info_count = int(np.searchsorted(budget, target_fer, side='right'))
    frozen_mask = np.ones(result.block_size, dtype=bool)
    frozen_mask[order[:info_count]] = False
    metadata = CodeMetadata(channel=result.channel, target_fer=target_fer, quantization=result.quantization)
    code = PolarCode(n=result.n, frozen_mask=frozen_mask, metadata=metadata)
    logger.info('Code for %s at n=%d: rate %.6f, %d frozen bits, union bound %.4g',
                result.channel, result.n, code.rate, code.frozen_count, fer_upper_bound(code, result))
    return code


def efficiency(code: PolarCode, channel: ChannelModel) -> Efficiency:
    """
    Reconciliation efficiency of a code on a channel of the same family.
    BSC: R / (1 - h(p)). BIAWGN: R / (0.5 log2(1 + snr)), with R / C_BIAWGN as beta_alt.
    """
    if code.metadata.channel.kind is not channel.kind:
        raise CodeMismatchError(f'Code built for {code.metadata.channel} cannot be rated on {channel}')
    reference = channel.capacity()
    if reference <= 0.0:
        raise CodeMismatchError(f'{channel} has zero capacity')
    if channel.kind is ChannelKind.BSC:
        return Efficiency(beta=code.rate / reference)
    return Efficiency(beta=code.rate / gaussian_mutual_information(channel.snr), beta_alt=code.rate / reference)


def fer_upper_bound(code: PolarCode, result: ConstructionResult) -> float:
    if code.n != result.n:
        raise CodeMismatchError(f'Code has n={code.n}, construction result has n={result.n}')
    return float(min(1.0, result.pe[~code.frozen_mask].sum()))


def construct(channel: ChannelModel, n: int, target_fer: float, quantization: Quantization = Quantization(),
              method: ConstructionMethod = ConstructionMethod.DENSITY_EVOLUTION
              ) -> tuple[PolarCode, ConstructionResult]:
    """Runs the chosen construction and selects the frozen set in one call."""
    if method is ConstructionMethod.GAUSSIAN_APPROXIMATION:
        result = gaussian_approximation(channel, n)
    else:
        result = density_evolution(channel, n, quantization)
    return select_frozen(result, target_fer), result


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_N:
        raise ValueError(f'n must lie in [1, {MAX_N}], {n} was provided')
