import asyncio
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from .helpers import random_code
from ..src.scripts.channel import Bsc
from ..src.scripts.code_table import code_checksum
from ..src.scripts.errors import HandshakeError, WireProtocolError
from ..src.scripts.reconcile import Outcome, Role
from ..src.scripts.transport import (AliceServer, BobClient, ObservationFile, RawKeyFile, SimulatedLink,
                                     parse_address)
from ..src.scripts.wire import Disclose, Hello, HelloAck, Result, read_frame, write_frame

HOST = '127.0.0.1'


async def loopback(alice_code, bob_code, keys, observations, blocks, channel=Bsc(0.0), window=3):
    server = AliceServer(alice_code, keys, blocks, window)
    port = await server.start(HOST, 0)
    client = BobClient(bob_code, channel, observations)
    bob, alice = await asyncio.gather(client.run(HOST, port), server.wait(), return_exceptions=True)
    return alice, bob


class LoopbackTests(SimpleTestCase):

    def setUp(self):
        self.code = random_code(9, 200, seed=1)
        self.link = SimulatedLink(Bsc(0.0), self.code.block_size, seed=21)

    async def test_noiseless_link(self):
        alice, bob = await loopback(self.code, self.code, self.link, self.link, blocks=10)
        for report, role in ((alice, Role.ALICE), (bob, Role.BOB)):
            self.assertIs(report.role, role)
            self.assertEqual(report.verified, 10)
            self.assertEqual(report.discarded, 0)
            self.assertEqual(report.wire_bits, 10 * (self.code.frozen_count + 64))
        self.assertEqual([session.block_id for session in bob.sessions], list(range(10)))
        for session in bob.sessions:
            np.testing.assert_array_equal(session.x_hat, self.link.raw_key(session.block_id))
            self.assertEqual(session.leakage_bits, self.code.frozen_count + 64)

    async def test_replayed_files(self):
        with tempfile.TemporaryDirectory() as directory:
            observation_path = Path(directory) / 'observations.bin'
            raw_key_path = Path(directory) / 'raw_key.bin'
            self.link.export(4, observation_path, raw_key_path)
            keys = RawKeyFile(raw_key_path, self.code.block_size)
            observations = ObservationFile(observation_path, Bsc(0.0), self.code.block_size)
            alice, bob = await loopback(self.code, self.code, keys, observations, blocks=4, window=1)
        self.assertEqual(alice.verified, 4)
        self.assertEqual(bob.verified, 4)

    async def test_tampered_code_table(self):
        tampered = random_code(9, 200, seed=2)
        self.assertNotEqual(code_checksum(tampered), code_checksum(self.code))
        alice, bob = await loopback(self.code, tampered, self.link, self.link, blocks=3)
        self.assertIsInstance(alice, HandshakeError)
        self.assertIsInstance(bob, HandshakeError)

    async def test_bob_leaves_mid_run(self):
        server = AliceServer(self.code, self.link, blocks=10, window=4)
        port = await server.start(HOST, 0)
        reader, writer = await asyncio.open_connection(HOST, port)
        await write_frame(writer, Hello(code_checksum(self.code), self.code.n))
        self.assertEqual(await read_frame(reader), HelloAck(True, code_checksum(self.code)))
        self.assertIsInstance(await read_frame(reader), Disclose)
        with self.assertLogs('reconciliation', level='WARNING'):
            writer.close()
            await writer.wait_closed()
            report = await server.wait()
        self.assertEqual(report.verified, 0)
        self.assertGreaterEqual(report.discarded, 1)
        self.assertTrue(all(session.outcome is Outcome.DISCARDED for session in report.sessions))

    async def test_wire_counts_every_frame(self):
        alice, bob = await loopback(self.code, self.code, self.link, self.link, blocks=10)
        # HELLO, HELLO_ACK, 10 DISCLOSE of 200 packed values, 10 RESULT, BYE
        expected = 15 + 15 + 10 * (4 + 2 + 13 + 25 + 8) + 10 * 15 + 6
        self.assertEqual(alice.wire_bytes, expected)
        self.assertEqual(bob.wire_bytes, expected)
        self.assertEqual(alice.tally.frames, 23)
        self.assertEqual(bob.tally, alice.tally)

    async def test_second_bob_is_refused(self):
        server = AliceServer(self.code, self.link, blocks=10, window=4)
        port = await server.start(HOST, 0)
        reader, writer = await asyncio.open_connection(HOST, port)
        await write_frame(writer, Hello(code_checksum(self.code), self.code.n))
        self.assertEqual(await read_frame(reader), HelloAck(True, code_checksum(self.code)))
        self.assertIsInstance(await read_frame(reader), Disclose)
        with self.assertLogs('reconciliation', level='WARNING') as logs:
            intruder_reader, intruder_writer = await asyncio.open_connection(HOST, port)
            with self.assertRaises((asyncio.IncompleteReadError, ConnectionError)):
                await write_frame(intruder_writer, Hello(code_checksum(self.code), self.code.n))
                await read_frame(intruder_reader)
            intruder_writer.close()
            writer.close()
            await writer.wait_closed()
            report = await server.wait()
        self.assertTrue(any('second connection' in line for line in logs.output))
        self.assertEqual([session.block_id for session in report.sessions], list(range(len(report.sessions))))
        self.assertEqual(report.tally.frames - report.count(Outcome.DISCARDED), 2)
        self.assertEqual(report.verified, 0)

    async def test_protocol_error_discards_blocks_in_flight(self):
        server = AliceServer(self.code, self.link, blocks=10, window=4)
        port = await server.start(HOST, 0)
        reader, writer = await asyncio.open_connection(HOST, port)
        await write_frame(writer, Hello(code_checksum(self.code), self.code.n))
        await read_frame(reader)
        self.assertIsInstance(await read_frame(reader), Disclose)
        with self.assertLogs('reconciliation', level='WARNING'):
            await write_frame(writer, Result(99, Outcome.VERIFIED))
            with self.assertRaisesMessage(WireProtocolError, 'not in flight'):
                await server.wait()
        writer.close()
        self.assertGreaterEqual(len(server.report.sessions), 1)
        self.assertEqual(server.report.count(Outcome.PENDING), 0)
        self.assertTrue(all(session.outcome is Outcome.DISCARDED for session in server.report.sessions))


class SimulatedLinkTests(SimpleTestCase):

    def test_blocks_are_reproducible(self):
        link = SimulatedLink(Bsc(0.1), 256, seed=5)
        np.testing.assert_array_equal(link.raw_key(3), SimulatedLink(Bsc(0.1), 256, seed=5).raw_key(3))
        self.assertFalse(np.array_equal(link.raw_key(3), link.raw_key(4)))
        flips = np.mean([np.mean(link.raw_key(b) != link.observations(b)) for b in range(40)])
        self.assertTrue(0.07 < flips < 0.13)

    def test_export_matches_the_link(self):
        link = SimulatedLink(Bsc(0.1), 64, seed=6)
        with tempfile.TemporaryDirectory() as directory:
            observation_path = Path(directory) / 'observations.bin'
            raw_key_path = Path(directory) / 'raw_key.bin'
            link.export(3, observation_path, raw_key_path)
            link.export(3, observation_path, raw_key_path)
            self.assertEqual(observation_path.stat().st_size, 3 * 8)
            np.testing.assert_array_equal(RawKeyFile(raw_key_path, 64).raw_key(2), link.raw_key(2))
            np.testing.assert_array_equal(ObservationFile(observation_path, Bsc(0.1), 64).observations(1),
                                          link.observations(1))


class AddressTests(SimpleTestCase):

    def test_parse(self):
        self.assertEqual(parse_address('127.0.0.1:7474'), ('127.0.0.1', 7474))
        self.assertEqual(parse_address('::1:80'), ('::1', 80))
        for value in ('localhost', ':80', 'host:', 'host:http', 'host:70000'):
            with self.subTest(value=value), self.assertRaises(ValueError):
                parse_address(value)
