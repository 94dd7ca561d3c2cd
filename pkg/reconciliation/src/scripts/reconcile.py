"""
One-way reconciliation with polar codes. Alice discloses her u-domain values at
the frozen positions and a keyed hash of her raw block; Bob decodes his
observations with the frozen values fixed and keeps the block only if the hash
of his estimate matches.

A verified block differs from Alice's with probability at most about 2^-64 (hash
collision). The classical channel is assumed authenticated elsewhere.
"""
from __future__ import annotations

import hashlib
import logging
import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import ChannelKind, ChannelModel, binary_entropy, gaussian_mutual_information
from .construction import PolarCode
from .errors import CodeMismatchError, SessionStateError
from .polar_core import BitBlock, Representation, SuccessiveCancellationDecoder, polar_transform

logger = logging.getLogger(__name__)

HASH_BITS: int = 64


class Outcome(Enum):
    PENDING = 0
    VERIFIED = 1
    DISCARDED = 2

    def __str__(self) -> str:
        return self._name_.lower()


class Role(Enum):
    ALICE = 'alice'
    BOB = 'bob'

    def __str__(self) -> str:
        return self.value


def verification_hash(x: BitBlock | np.ndarray, block_id: int) -> int:
    """BLAKE2b-64 of the packed block, keyed with the block id (u64, little-endian)."""
    bits = np.asarray(x.bits if isinstance(x, BitBlock) else x, dtype=np.uint8)
    packed = np.packbits(bits, bitorder='little').tobytes()
    digest = hashlib.blake2b(packed, digest_size=HASH_BITS // 8, key=block_id.to_bytes(8, 'little'))
    return int.from_bytes(digest.digest(), 'little')


@dataclass(frozen=True, eq=False)
class Disclosure:
    """What Alice puts on the classical channel for one block."""
    block_id: int
    frozen_values: np.ndarray = field(repr=False)
    verification_hash: int

    @property
    def leakage_bits(self) -> int:
        return int(self.frozen_values.size) + HASH_BITS


@dataclass(eq=False)
class ReconciliationSession:
    """
    State of one block on one side. `reference` names the party whose string is
    kept: Alice in direct reconciliation, Bob in reverse reconciliation, where the
    roles of discloser and decoder are swapped and nothing else changes.
    """
    code: PolarCode
    role: Role
    block_id: int
    disclosed: np.ndarray = field(repr=False)
    verification: int
    outcome: Outcome = Outcome.PENDING
    reference: Role = Role.ALICE
    x_hat: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def open(cls, code: PolarCode, role: Role, disclosure: Disclosure, reference: Role = Role.ALICE
             ) -> ReconciliationSession:
        return cls(code=code, role=role, block_id=disclosure.block_id, disclosed=disclosure.frozen_values,
                   verification=disclosure.verification_hash, reference=reference)

    @property
    def leakage_bits(self) -> int:
        return self.code.frozen_count + HASH_BITS

    def settle(self, outcome: Outcome) -> None:
        if self.outcome is not Outcome.PENDING or outcome is Outcome.PENDING:
            raise SessionStateError(self.block_id, str(self.outcome), str(outcome))
        self.outcome = outcome
        logger.info('%s block %d: %s, %d bits leaked', self.role, self.block_id, outcome, self.leakage_bits)


def alice_disclose(code: PolarCode, x: BitBlock | np.ndarray, block_id: int = 0) -> Disclosure:
    """
    Computes Alice's disclosure; x itself is never sent.
    :param code: polar code shared with Bob
    :param x: Alice's raw key block of length 2^n
    :param block_id: session key of the verification hash
    :return: frozen values (u = T(x) at the frozen indices, ascending) and the hash of x
    """
    bits = np.asarray(x.bits if isinstance(x, BitBlock) else x, dtype=np.uint8)
    if bits.size != code.block_size:
        raise CodeMismatchError(f'Raw key block of length {bits.size} does not fit a code of length {code.block_size}')
    u = polar_transform(bits).bits
    return Disclosure(block_id=block_id, frozen_values=u[code.frozen_mask], verification_hash=verification_hash(bits, block_id))


@dataclass(frozen=True, eq=False)
class BobResult:
    outcome: Outcome
    x_hat: np.ndarray = field(repr=False)
    decode_seconds: float


class Reconciler:
    """Bob's side for one code and channel; owns a decoder, so one instance per thread."""

    def __init__(self, code: PolarCode, channel: ChannelModel,
                 representation: Representation = Representation.FIXED_POINT) -> None:
        if code.metadata.channel.kind is not channel.kind:
            raise CodeMismatchError(f'Code built for {code.metadata.channel} cannot decode {channel} observations')
        self.code = code
        self.channel = channel
        self.decoder = SuccessiveCancellationDecoder(code, representation)

    def reconcile(self, observations: np.ndarray, disclosure: Disclosure) -> BobResult:
        observations = np.asarray(observations)
        if observations.size != self.code.block_size:
            raise CodeMismatchError(
                f'Got {observations.size} observations for a code of length {self.code.block_size}'
            )
        llrs = self.channel.llr(observations)
        start = time.perf_counter()
        u_hat = self.decoder.decode(llrs, disclosure.frozen_values)
        elapsed = time.perf_counter() - start
        x_hat = polar_transform(u_hat).bits
        verified = verification_hash(x_hat, disclosure.block_id) == disclosure.verification_hash
        return BobResult(outcome=Outcome.VERIFIED if verified else Outcome.DISCARDED, x_hat=x_hat,
                         decode_seconds=elapsed)


def bob_decode(code: PolarCode, observations: np.ndarray, channel: ChannelModel, frozen_values: np.ndarray,
               verification: int, block_id: int = 0,
               representation: Representation = Representation.FIXED_POINT) -> BobResult:
    """Single-shot decode and verification; the fixed-point decoder is the default."""
    disclosure = Disclosure(block_id=block_id, frozen_values=np.asarray(frozen_values, dtype=np.uint8),
                            verification_hash=verification)
    return Reconciler(code, channel, representation).reconcile(observations, disclosure)


@dataclass(frozen=True)
class LeakageReport:
    leakage_bits: int
    effective_beta: float
    non_physical: bool


def leakage_report(session: ReconciliationSession, channel: ChannelModel | None = None) -> LeakageReport:
    """
    Leakage of a settled session and the efficiency it actually achieves,
    (1 - leakage_bits / N) over the reference rate of the channel (1 - h(p) for the
    BSC, 0.5 log2(1 + snr) for the BIAWGN channel).
    :param session: verified or discarded session
    :param channel: channel to rate against, the code's construction channel by default
    """
    if session.outcome is Outcome.PENDING:
        raise SessionStateError(session.block_id, str(session.outcome), 'leakage report')
    channel = channel or session.code.metadata.channel
    if channel.kind is ChannelKind.BSC:
        reference = 1.0 - binary_entropy(channel.parameter)
    else:
        reference = gaussian_mutual_information(channel.parameter)
    rate = 1.0 - session.leakage_bits / session.code.block_size
    beta = rate / reference
    if beta > 1.0:
        logger.warning('Block %d on %s: effective efficiency %.4f exceeds 1, the configuration is not physical',
                       session.block_id, channel, beta)
    return LeakageReport(leakage_bits=session.leakage_bits, effective_beta=beta, non_physical=beta > 1.0)
