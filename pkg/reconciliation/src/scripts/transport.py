"""
Reconciliation between two processes over one TCP connection, standing for the
authenticated noiseless classical channel of a QKD link.

Alice serves: after the code-table handshake she pipelines DISCLOSE frames (at
most `window` blocks in flight) while a second task collects Bob's RESULT
frames, matched to their sessions by block id. Bob connects, decodes each block
in arrival order and answers. Raw keys and observations come either from a
simulated quantum link shared through a seed (demo mode) or from files (replay
mode).
"""
from __future__ import annotations

import asyncio
import contextlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np

from .channel import (ChannelModel, append_packed_bits, block_rng, read_observations, read_packed_bits,
                      write_observations)
from .code_table import code_checksum
from .construction import PolarCode
from .errors import HandshakeError, WireProtocolError
from .polar_core import Representation
from .reconcile import Outcome, ReconciliationSession, Reconciler, Role, alice_disclose
from .wire import Bye, Disclose, Hello, HelloAck, Result, WireTally, read_frame, write_frame

logger = logging.getLogger(__name__)

DEFAULT_WINDOW: int = 8
_CONNECTION_LOST = (asyncio.IncompleteReadError, ConnectionError)


class KeySource(Protocol):
    """Protocol class for Alice's raw key supply."""

    def raw_key(self, block_id: int) -> np.ndarray:
        """Alice's raw key block number block_id."""


class ObservationSource(Protocol):
    """Protocol class for Bob's observation supply."""

    def observations(self, block_id: int) -> np.ndarray:
        """Bob's channel observations of block number block_id."""


@dataclass(frozen=True)
class SimulatedLink:
    """
    Deterministic simulated quantum link: raw key and observations of block b
    are drawn from the RNG stream (seed, b), so both ends can replay them.
    """
    channel: ChannelModel
    block_size: int
    seed: int

    def _draw(self, block_id: int) -> tuple[np.ndarray, np.ndarray]:
        rng = block_rng(self.seed, block_id)
        x = rng.integers(0, 2, self.block_size, dtype=np.uint8)
        return x, self.channel.transmit(x, rng)

    def raw_key(self, block_id: int) -> np.ndarray:
        return self._draw(block_id)[0]

    def observations(self, block_id: int) -> np.ndarray:
        return self._draw(block_id)[1]

    def export(self, blocks: int, observation_path: Path, raw_key_path: Path | None = None) -> None:
        """Writes Bob's observations (and optionally Alice's raw keys) of the first `blocks` blocks."""
        observation_path = Path(observation_path)
        observation_path.parent.mkdir(parents=True, exist_ok=True)
        observation_path.write_bytes(b'')
        if raw_key_path is not None:
            Path(raw_key_path).write_bytes(b'')
        for block_id in range(blocks):
            x, observations = self._draw(block_id)
            write_observations(observation_path, self.channel, observations)
            if raw_key_path is not None:
                append_packed_bits(raw_key_path, x)


@dataclass(frozen=True)
class RawKeyFile:
    path: Path
    block_size: int

    def raw_key(self, block_id: int) -> np.ndarray:
        return read_packed_bits(self.path, self.block_size, block_id)


@dataclass(frozen=True)
class ObservationFile:
    path: Path
    channel: ChannelModel
    block_size: int

    def observations(self, block_id: int) -> np.ndarray:
        return read_observations(self.path, self.channel, self.block_size, block_id)


@dataclass
class TransportReport:
    """Sessions of one side and the frames it counted on the wire."""
    role: Role
    sessions: list[ReconciliationSession] = field(default_factory=list)
    tally: WireTally = field(default_factory=WireTally)

    @property
    def wire_bits(self) -> int:
        """Key-relevant bits of the DISCLOSE frames sent or received."""
        return self.tally.key_bits

    @property
    def wire_bytes(self) -> int:
        return self.tally.octets

    def count(self, outcome: Outcome) -> int:
        return sum(session.outcome is outcome for session in self.sessions)

    @property
    def verified(self) -> int:
        return self.count(Outcome.VERIFIED)

    @property
    def discarded(self) -> int:
        return self.count(Outcome.DISCARDED)


def parse_address(value: str) -> tuple[str, int]:
    """Splits 'host:port'. Raises a ValueError if provided string is of wrong format."""
    host, separator, port = value.rpartition(':')
    if not separator or not host or not port.isdigit() or int(port) > 65535:
        raise ValueError(f"Address must be of format 'host:port', {value!r} was provided")
    return host, int(port)


def _discard_pending(sessions: list[ReconciliationSession]) -> int:
    pending = [session for session in sessions if session.outcome is Outcome.PENDING]
    for session in pending:
        session.settle(Outcome.DISCARDED)
    return len(pending)


class AliceServer:
    """Reference side of direct reconciliation, serving a single Bob connection."""

    def __init__(self, code: PolarCode, keys: KeySource, blocks: int, window: int = DEFAULT_WINDOW) -> None:
        if blocks < 1:
            raise ValueError(f'At least one block must be reconciled, {blocks} was provided')
        self.code = code
        self.keys = keys
        self.blocks = blocks
        self.window = window
        self.checksum = code_checksum(code)
        self.report = TransportReport(Role.ALICE)
        self._server: asyncio.Server | None = None
        self._done: asyncio.Future | None = None
        self._busy = False

    async def start(self, host: str, port: int) -> int:
        """Starts listening and returns the bound port (useful with port 0)."""
        self._done = asyncio.get_running_loop().create_future()
        self._server = await asyncio.start_server(self._handle, host, port)
        bound = self._server.sockets[0].getsockname()[1]
        logger.info('Alice listening on %s:%d, code %016x', host, bound, self.checksum)
        return bound

    async def wait(self) -> TransportReport:
        try:
            return await self._done
        finally:
            self._server.close()
            await self._server.wait_closed()

    async def serve(self, host: str, port: int) -> TransportReport:
        await self.start(host, port)
        return await self.wait()

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        if self._done.done() or self._busy:
            if self._busy:
                logger.warning('Refused a second connection while a Bob session is running')
            writer.close()
            return
        self._busy = True
        error: BaseException | None = None
        try:
            await self._session(reader, writer)
        except Exception as exc:
            error = exc
        finally:
            if lost := _discard_pending(self.report.sessions):
                logger.warning('Session ended with %d blocks in flight, discarded', lost)
            writer.close()
            with contextlib.suppress(*_CONNECTION_LOST):
                await writer.wait_closed()
        if self._done.done():
            return
        if error is None:
            self._done.set_result(self.report)
        else:
            self._done.set_exception(error)

    async def _session(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        try:
            hello = await read_frame(reader, self.report.tally)
        except _CONNECTION_LOST:
            logger.warning('Bob left before the handshake')
            return
        if not isinstance(hello, Hello):
            raise WireProtocolError(f'Expected HELLO, got {type(hello).__name__}')
        accepted = hello.checksum == self.checksum and hello.n == self.code.n
        await write_frame(writer, HelloAck(accepted, self.checksum), self.report.tally)
        if not accepted:
            raise HandshakeError(self.checksum, hello.checksum)

        pending: dict[int, ReconciliationSession] = {}
        window = asyncio.Semaphore(self.window)
        sender = asyncio.create_task(self._send(writer, pending, window))
        receiver = asyncio.create_task(self._receive(reader, pending, window))
        done, _ = await asyncio.wait({sender, receiver}, return_when=asyncio.FIRST_EXCEPTION)
        failure = next((task.exception() for task in done if task.exception() is not None), None)
        if failure is None:
            await write_frame(writer, Bye(), self.report.tally)
            return
        for task in (sender, receiver):
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError, Exception):
                await task
        if not isinstance(failure, _CONNECTION_LOST):
            raise failure
        logger.warning('Connection to Bob lost')

    async def _send(self, writer: asyncio.StreamWriter, pending: dict[int, ReconciliationSession],
                    window: asyncio.Semaphore) -> None:
        for block_id in range(self.blocks):
            await window.acquire()
            x = self.keys.raw_key(block_id)
            disclosure = await asyncio.to_thread(alice_disclose, self.code, x, block_id)
            session = ReconciliationSession.open(self.code, Role.ALICE, disclosure)
            pending[block_id] = session
            self.report.sessions.append(session)
            frame = Disclose.from_disclosure(disclosure, self.code.n)
            await write_frame(writer, frame, self.report.tally)

    async def _receive(self, reader: asyncio.StreamReader, pending: dict[int, ReconciliationSession],
                       window: asyncio.Semaphore) -> None:
        for _ in range(self.blocks):
            frame = await read_frame(reader, self.report.tally)
            if not isinstance(frame, Result):
                raise WireProtocolError(f'Expected RESULT, got {type(frame).__name__}')
            session = pending.pop(frame.block_id, None)
            if session is None:
                raise WireProtocolError(f'RESULT for block {frame.block_id}, which is not in flight')
            session.settle(frame.verdict)
            window.release()


class BobClient:
    """Decoding side: answers every DISCLOSE with a RESULT until Alice says BYE."""

    def __init__(self, code: PolarCode, channel: ChannelModel, observations: ObservationSource,
                 representation: Representation = Representation.FIXED_POINT) -> None:
        self.code = code
        self.observations = observations
        self.reconciler = Reconciler(code, channel, representation)
        self.checksum = code_checksum(code)
        self.report = TransportReport(Role.BOB)

    async def run(self, host: str, port: int) -> TransportReport:
        reader, writer = await asyncio.open_connection(host, port)
        try:
            await self._exchange(reader, writer)
        except _CONNECTION_LOST:
            logger.warning('Connection to Alice lost')
        finally:
            if lost := _discard_pending(self.report.sessions):
                logger.warning('Session ended with %d blocks in flight, discarded', lost)
            writer.close()
            with contextlib.suppress(*_CONNECTION_LOST):
                await writer.wait_closed()
        return self.report

    async def _exchange(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        await write_frame(writer, Hello(self.checksum, self.code.n), self.report.tally)
        ack = await read_frame(reader, self.report.tally)
        if not isinstance(ack, HelloAck):
            raise WireProtocolError(f'Expected HELLO_ACK, got {type(ack).__name__}')
        if not ack.accepted:
            raise HandshakeError(self.checksum, ack.checksum)
        logger.info('Handshake accepted, code %016x', self.checksum)
        while not isinstance(frame := await read_frame(reader, self.report.tally), Bye):
            if not isinstance(frame, Disclose):
                raise WireProtocolError(f'Expected DISCLOSE, got {type(frame).__name__}')
            if frame.n != self.code.n:
                raise WireProtocolError(f'Block {frame.block_id} disclosed for n={frame.n}, code has n={self.code.n}')
            disclosure = frame.to_disclosure()
            session = ReconciliationSession.open(self.code, Role.BOB, disclosure)
            self.report.sessions.append(session)
            observations = self.observations.observations(frame.block_id)
            result = await asyncio.to_thread(self.reconciler.reconcile, observations, disclosure)
            session.x_hat = result.x_hat
            session.settle(result.outcome)
            await write_frame(writer, Result(frame.block_id, result.outcome), self.report.tally)
