"""
Long runs checking the reference operating points. Excluded from the default
run; select them with `manage.py test --tag=slow` (minutes) or `--tag=acceptance`
(hours, large block sizes).
"""
import asyncio
import os
import unittest

import numpy as np
from django.test import SimpleTestCase, tag

from ..src.scripts.bench import PRESETS, run_plan, run_trials
from ..src.scripts.channel import BiAwgn, Bsc, block_rng
from ..src.scripts.construction import construct, efficiency
from ..src.scripts.polar_core import Representation, SuccessiveCancellationDecoder
from ..src.scripts.reconcile import (Outcome, ReconciliationSession, Reconciler, Role, alice_disclose,
                                     leakage_report)
from ..src.scripts.transport import AliceServer, BobClient, SimulatedLink

HOST = '127.0.0.1'


@tag('slow')
class ShortBlockTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.channel = Bsc(0.02)
        cls.code, cls.result = construct(cls.channel, 16, 0.1)

    def test_efficiency_and_fer(self):
        self.assertTrue(0.925 <= efficiency(self.code, self.channel).beta <= 0.945)
        row = run_trials(self.code, self.channel, trials=500, seed=2013, result=self.result)
        self.assertTrue(0.05 <= row.fer_measured <= 0.14, row.fer_measured)
        sigma = np.sqrt(row.fer_bound * (1.0 - row.fer_bound) / 500)
        self.assertLessEqual(row.fer_measured, row.fer_bound + 3.0 * sigma)

    def test_effective_efficiency(self):
        x = np.zeros(self.code.block_size, dtype=np.uint8)
        session = ReconciliationSession.open(self.code, Role.ALICE, alice_disclose(self.code, x))
        session.settle(Outcome.VERIFIED)
        beta = efficiency(self.code, self.channel).beta
        expected = beta - 64 / (self.code.block_size * self.channel.capacity())
        self.assertAlmostEqual(leakage_report(session).effective_beta, expected, delta=1e-3)

    def test_fixed_point_tracks_float(self):
        fixed = Reconciler(self.code, self.channel, Representation.FIXED_POINT)
        exact = Reconciler(self.code, self.channel, Representation.FLOAT64)
        agreements = fixed_failures = exact_failures = 0
        for trial in range(500):
            rng = block_rng(7, trial)
            x = rng.integers(0, 2, self.code.block_size, dtype=np.uint8)
            observations = self.channel.transmit(x, rng)
            disclosure = alice_disclose(self.code, x, trial)
            fixed_outcome = fixed.reconcile(observations, disclosure).outcome
            exact_outcome = exact.reconcile(observations, disclosure).outcome
            agreements += fixed_outcome is exact_outcome
            fixed_failures += fixed_outcome is Outcome.DISCARDED
            exact_failures += exact_outcome is Outcome.DISCARDED
        self.assertGreaterEqual(agreements / 500, 0.98)
        self.assertLessEqual(fixed_failures, 2 * exact_failures)

    def test_demo_over_loopback(self):
        async def demo():
            link = SimulatedLink(self.channel, self.code.block_size, seed=2013)
            server = AliceServer(self.code, link, blocks=200)
            port = await server.start(HOST, 0)
            bob = await BobClient(self.code, self.channel, link).run(HOST, port)
            return await server.wait(), bob

        alice, bob = asyncio.run(demo())
        self.assertTrue(150 <= bob.verified <= 194, bob.verified)
        self.assertEqual(alice.verified, bob.verified)
        self.assertEqual(alice.wire_bits, 200 * (self.code.frozen_count + 64))
        for session in bob.sessions:
            if session.outcome is Outcome.VERIFIED:
                np.testing.assert_array_equal(session.x_hat, link_key(self.channel, self.code, session.block_id))

    @unittest.skipIf((os.cpu_count() or 1) < 4, 'needs four cores')
    def test_parallel_throughput_scales(self):
        single = run_trials(self.code, self.channel, trials=64, seed=1, workers=1)
        parallel = run_trials(self.code, self.channel, trials=64, seed=1, workers=4)
        self.assertGreater(parallel.decode_throughput, 1.5 * single.decode_throughput)

    def test_decoder_buffers_are_linear(self):
        decoder = SuccessiveCancellationDecoder(self.code, Representation.FIXED_POINT)
        self.assertEqual(decoder._llrs.size, 2 * self.code.block_size - 1)


def link_key(channel, code, block_id):
    return SimulatedLink(channel, code.block_size, seed=2013).raw_key(block_id)


@tag('acceptance')
class OperatingPointTests(SimpleTestCase):

    def test_table(self):
        report, acceptance = run_plan(PRESETS['headline'], seed=2013)
        self.assertTrue(acceptance.passed, acceptance.failures)
        self.assertEqual(len(report), 4)

    def test_bsc_sweep(self):
        _, acceptance = run_plan(PRESETS['bsc-sweep'])
        self.assertTrue(acceptance.passed, acceptance.failures)

    def test_biawgn_sweep(self):
        _, acceptance = run_plan(PRESETS['biawgn-ci'])
        self.assertTrue(acceptance.passed, acceptance.failures)

    def test_biawgn_long_block(self):
        channel = BiAwgn(1.097)
        code, _ = construct(channel, 24, 0.1)
        self.assertTrue(0.937 <= efficiency(code, channel).beta <= 0.967)
