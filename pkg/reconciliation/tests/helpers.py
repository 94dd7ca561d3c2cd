import numpy as np

from ..src.scripts.channel import Bsc
from ..src.scripts.construction import CodeMetadata, PolarCode, Quantization


def make_code(frozen_mask, channel=Bsc(0.02), target_fer=0.1) -> PolarCode:
    """Polar code with a hand-picked frozen set."""
    mask = np.asarray(frozen_mask, dtype=bool).copy()
    n = mask.size.bit_length() - 1
    return PolarCode(n=n, frozen_mask=mask, metadata=CodeMetadata(channel, target_fer, Quantization()))


def random_code(n: int, frozen_count: int, seed: int = 0, channel=Bsc(0.02)) -> PolarCode:
    rng = np.random.default_rng(seed)
    mask = np.zeros(1 << n, dtype=bool)
    mask[rng.choice(1 << n, frozen_count, replace=False)] = True
    return make_code(mask, channel)


def encode(bits):
    """Recursive x = [T(a) ^ T(b), T(b)] on halves, independent of the butterfly implementation."""
    bits = list(bits)
    if len(bits) == 1:
        return bits
    half = len(bits) // 2
    left, right = encode(bits[:half]), encode(bits[half:])
    return [a ^ b for a, b in zip(left, right)] + right
