"""
Secret key rate accounting of a QKD link, in bits per quantum symbol.

    K_th   = I(x:y) - S(x:E)                     (perfect reconciliation)
    K_real = beta I(x:y) - S(x:E)                 (reconciliation efficiency beta)
    K_sys  = alpha K_real                         (alpha = D_ECCout / D_ECCin)
    K      = alpha (1 - FER) K_real               (discarded frames)

S(x:E), the Holevo bound on Eve's information, is an input.
"""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class KeyRateParams:
    beta: float
    mutual_info: float
    holevo: float
    alpha: float = 1.0
    fer: float = 0.0

    def __post_init__(self) -> None:
        for name in ('beta', 'alpha', 'fer'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f'{name} must lie in [0, 1], {value} was provided')
        for name in ('mutual_info', 'holevo'):
            value = getattr(self, name)
            if not (value >= 0.0 and math.isfinite(value)):
                raise ValueError(f'{name} must be a finite value >= 0, {value} was provided')


@dataclass(frozen=True)
class KeyRate:
    theoretical: float
    real: float
    system: float
    final: float

    @property
    def no_secret_key(self) -> bool:
        return self.final <= 0.0


def theoretical_key_rate(mutual_info: float, holevo: float) -> float:
    return mutual_info - holevo


def key_rate(params: KeyRateParams) -> KeyRate:
    """Negative rates are returned as they are; `no_secret_key` flags them."""
    real = params.beta * params.mutual_info - params.holevo
    system = params.alpha * real
    return KeyRate(
        theoretical=theoretical_key_rate(params.mutual_info, params.holevo),
        real=real,
        system=system,
        final=system * (1.0 - params.fer),
    )
