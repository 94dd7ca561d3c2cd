"""
Frames of the classical channel between Alice and Bob.

Every frame is `length u32 | version u8 | kind u8 | payload`, little-endian, where
length counts the bytes after the length field itself.

    HELLO      checksum u64 | n u8                        (Bob -> Alice)
    HELLO_ACK  accepted u8 | checksum u64                 (Alice -> Bob)
    DISCLOSE   block_id u64 | n u8 | frozen_count u32 | frozen values packed
               ceil(frozen_count / 8) bytes, bit i at byte i // 8 bit i % 8 | hash u64
    RESULT     block_id u64 | verdict u8 (1 verified, 2 discarded)
    BYE        empty
"""
from __future__ import annotations

import asyncio
import struct
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .errors import WireProtocolError
from .reconcile import HASH_BITS, Disclosure, Outcome

VERSION: int = 1
LENGTH = struct.Struct('<I')
PREFIX = struct.Struct('<BB')
HELLO = struct.Struct('<QB')
HELLO_ACK = struct.Struct('<BQ')
DISCLOSE_HEAD = struct.Struct('<QBI')
DISCLOSE_TAIL = struct.Struct('<Q')
RESULT = struct.Struct('<QB')

# Largest body accepted, enough for the disclosure of a 2^27 block.
MAX_BODY: int = PREFIX.size + DISCLOSE_HEAD.size + (1 << 24) + DISCLOSE_TAIL.size


class FrameKind(IntEnum):
    HELLO = 1
    HELLO_ACK = 2
    DISCLOSE = 3
    RESULT = 4
    BYE = 5


@dataclass(frozen=True)
class Hello:
    checksum: int
    n: int


@dataclass(frozen=True)
class HelloAck:
    accepted: bool
    checksum: int


@dataclass(frozen=True, eq=False)
class Disclose:
    block_id: int
    n: int
    frozen_values: np.ndarray = field(repr=False)
    verification_hash: int

    @classmethod
    def from_disclosure(cls, disclosure: Disclosure, n: int) -> Disclose:
        return cls(block_id=disclosure.block_id, n=n, frozen_values=disclosure.frozen_values,
                   verification_hash=disclosure.verification_hash)

    def to_disclosure(self) -> Disclosure:
        return Disclosure(block_id=self.block_id, frozen_values=self.frozen_values,
                          verification_hash=self.verification_hash)

    @property
    def leakage_bits(self) -> int:
        """Key-relevant bits carried: the frozen values and the hash."""
        return int(self.frozen_values.size) + HASH_BITS


@dataclass(frozen=True)
class Result:
    block_id: int
    verdict: Outcome


@dataclass(frozen=True)
class Bye:
    pass


Frame = Hello | HelloAck | Disclose | Result | Bye


@dataclass
class WireTally:
    """
    Frames one side has sent or received, counted from their encoded bytes.
    key_bits sums, over DISCLOSE frames, the frozen-value count field and the hash
    width; the padding of the packed values is not key-relevant.
    """
    frames: int = 0
    octets: int = 0
    key_bits: int = 0

    def record(self, body: bytes) -> None:
        self.frames += 1
        self.octets += LENGTH.size + len(body)
        if body[1] == FrameKind.DISCLOSE:
            count = DISCLOSE_HEAD.unpack_from(body, PREFIX.size)[2]
            self.key_bits += count + 8 * DISCLOSE_TAIL.size


def encode_frame(frame: Frame, tally: WireTally | None = None) -> bytes:
    match frame:
        case Hello(checksum, n):
            kind, payload = FrameKind.HELLO, HELLO.pack(checksum, n)
        case HelloAck(accepted, checksum):
            kind, payload = FrameKind.HELLO_ACK, HELLO_ACK.pack(int(accepted), checksum)
        case Disclose():
            values = np.asarray(frame.frozen_values, dtype=np.uint8)
            kind = FrameKind.DISCLOSE
            payload = (DISCLOSE_HEAD.pack(frame.block_id, frame.n, values.size)
                       + np.packbits(values, bitorder='little').tobytes()
                       + DISCLOSE_TAIL.pack(frame.verification_hash))
        case Result(block_id, verdict):
            if verdict is Outcome.PENDING:
                raise WireProtocolError(f'Block {block_id}: a pending session has no verdict to send')
            kind, payload = FrameKind.RESULT, RESULT.pack(block_id, verdict.value)
        case Bye():
            kind, payload = FrameKind.BYE, b''
        case _:
            raise TypeError(f'Not a frame: {frame!r}')
    body = PREFIX.pack(VERSION, kind) + payload
    if tally is not None:
        tally.record(body)
    return LENGTH.pack(len(body)) + body


def decode_body(body: bytes, tally: WireTally | None = None) -> Frame:
    """Parses the bytes following the length field, recording them in tally once they parse."""
    if len(body) < PREFIX.size:
        raise WireProtocolError(f'Frame of {len(body)} bytes has no header')
    version, tag = PREFIX.unpack_from(body)
    if version != VERSION:
        raise WireProtocolError(f'Unsupported protocol version {version}')
    try:
        kind = FrameKind(tag)
    except ValueError:
        raise WireProtocolError(f'Unknown frame kind {tag}') from None
    payload = body[PREFIX.size:]
    try:
        frame = _decode_payload(kind, payload)
    except struct.error as exc:
        raise WireProtocolError(f'Malformed {kind.name} frame: {exc}') from exc
    if tally is not None:
        tally.record(body)
    return frame


def _decode_payload(kind: FrameKind, payload: bytes) -> Frame:
    if kind is FrameKind.HELLO:
        return Hello(*HELLO.unpack(payload))
    if kind is FrameKind.HELLO_ACK:
        accepted, checksum = HELLO_ACK.unpack(payload)
        return HelloAck(bool(accepted), checksum)
    if kind is FrameKind.RESULT:
        block_id, verdict = RESULT.unpack(payload)
        if verdict not in (Outcome.VERIFIED.value, Outcome.DISCARDED.value):
            raise WireProtocolError(f'Block {block_id}: invalid verdict {verdict}')
        return Result(block_id, Outcome(verdict))
    if kind is FrameKind.BYE:
        if payload:
            raise WireProtocolError('BYE frame carries a payload')
        return Bye()
    block_id, n, count = DISCLOSE_HEAD.unpack_from(payload)
    packed_size = (count + 7) // 8
    if len(payload) != DISCLOSE_HEAD.size + packed_size + DISCLOSE_TAIL.size:
        raise WireProtocolError(f'Block {block_id}: DISCLOSE length does not match {count} frozen values')
    (digest,) = DISCLOSE_TAIL.unpack_from(payload, DISCLOSE_HEAD.size + packed_size)
    values = np.zeros(0, dtype=np.uint8)
    if count:
        packed = np.frombuffer(payload, dtype=np.uint8, count=packed_size, offset=DISCLOSE_HEAD.size)
        values = np.unpackbits(packed, count=count, bitorder='little')
    return Disclose(block_id=block_id, n=n, frozen_values=values, verification_hash=digest)


async def read_frame(reader: asyncio.StreamReader, tally: WireTally | None = None) -> Frame:
    """Raises asyncio.IncompleteReadError when the peer closes mid-frame or between frames."""
    (length,) = LENGTH.unpack(await reader.readexactly(LENGTH.size))
    if length > MAX_BODY:
        raise WireProtocolError(f'Frame of {length} bytes exceeds the {MAX_BODY}-byte limit')
    return decode_body(await reader.readexactly(length), tally)


async def write_frame(writer: asyncio.StreamWriter, frame: Frame, tally: WireTally | None = None) -> None:
    writer.write(encode_frame(frame, tally))
    await writer.drain()
