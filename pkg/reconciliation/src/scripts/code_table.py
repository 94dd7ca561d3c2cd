"""
Bit-exact code-table files:

    magic 'PQCT' | version u16 | n u8 | channel tag u8 | parameter f64 | target FER f64 |
    DE bin count u32 | DE LLR clip f64 | frozen mask, ceil(2^n / 8) bytes, index i at byte i // 8 bit i % 8 |
    checksum u64 of all preceding bytes

All integers and floats are little-endian. The checksum is BLAKE2b with an 8-byte digest.
"""
from __future__ import annotations

import hashlib
import struct
from pathlib import Path

import numpy as np

from .channel import ChannelKind, make_channel
from .construction import CodeMetadata, PolarCode, Quantization
from .errors import CodeTableError

MAGIC: bytes = b'PQCT'
FORMAT_VERSION: int = 2
HEADER = struct.Struct('<4sHBBddId')
CHECKSUM = struct.Struct('<Q')


def checksum64(payload: bytes) -> int:
    """64-bit checksum used by code tables and the reconciliation handshake."""
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), 'little')


def to_bytes(code: PolarCode) -> bytes:
    meta = code.metadata
    header = HEADER.pack(MAGIC, FORMAT_VERSION, code.n, meta.channel.kind.value, meta.channel.parameter,
                         meta.target_fer, meta.quantization.bins, meta.quantization.llr_max)
    body = header + np.packbits(code.frozen_mask.astype(np.uint8), bitorder='little').tobytes()
    return body + CHECKSUM.pack(checksum64(body))


def code_checksum(code: PolarCode) -> int:
    """Checksum field of the code's table file, identifies a code in reports and handshakes."""
    return CHECKSUM.unpack(to_bytes(code)[-CHECKSUM.size:])[0]


def from_bytes(raw: bytes, source: str = '<memory>') -> PolarCode:
    """
    Parses a code table.
    :param raw: full file content
    :param source: name used in error messages
    :return: the polar code, with tool_version naming the file format
    """
    if len(raw) < HEADER.size + CHECKSUM.size:
        raise CodeTableError(source, 'truncated header')
    magic, version, n, tag, parameter, target_fer, bins, llr_max = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise CodeTableError(source, f'bad magic {magic!r}')
    if version != FORMAT_VERSION:
        raise CodeTableError(source, f'unsupported format version {version}')
    mask_bytes = ((1 << n) + 7) // 8
    expected = HEADER.size + mask_bytes + CHECKSUM.size
    if len(raw) != expected:
        raise CodeTableError(source, f'expected {expected} bytes, found {len(raw)}')
    body, (stored,) = raw[:-CHECKSUM.size], CHECKSUM.unpack(raw[-CHECKSUM.size:])
    if checksum64(body) != stored:
        raise CodeTableError(source, 'checksum mismatch')
    try:
        channel = make_channel(ChannelKind(tag), parameter)
    except ValueError as exc:
        raise CodeTableError(source, str(exc)) from exc
    packed = np.frombuffer(body, dtype=np.uint8, offset=HEADER.size)
    frozen_mask = np.unpackbits(packed, count=1 << n, bitorder='little').astype(bool)
    metadata = CodeMetadata(channel=channel, target_fer=target_fer,
                            quantization=Quantization(bins=bins, llr_max=llr_max),
                            tool_version=f'pqct-v{version}')
    return PolarCode(n=n, frozen_mask=frozen_mask, metadata=metadata)


def write_code_table(code: PolarCode, path: Path) -> int:
    """Writes the code table and returns its checksum."""
    raw = to_bytes(code)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(raw)
    return CHECKSUM.unpack(raw[-CHECKSUM.size:])[0]


def read_code_table(path: Path) -> PolarCode:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CodeTableError(str(path), exc.strerror or str(exc)) from exc
    return from_bytes(raw, source=str(path))
