import numpy as np
from django.test import SimpleTestCase

from .helpers import make_code, random_code
from ..src.scripts.channel import BiAwgn, Bsc, capacity
from ..src.scripts.construction import construct
from ..src.scripts.errors import CodeMismatchError, SessionStateError
from ..src.scripts.polar_core import Representation, polar_transform
from ..src.scripts.reconcile import (HASH_BITS, Disclosure, Outcome, Reconciler, ReconciliationSession, Role,
                                     alice_disclose, bob_decode, leakage_report, verification_hash)


def settled_session(code, outcome=Outcome.VERIFIED, block_id=0):
    x = np.zeros(code.block_size, dtype=np.uint8)
    session = ReconciliationSession.open(code, Role.BOB, alice_disclose(code, x, block_id))
    session.settle(outcome)
    return session


class DisclosureTests(SimpleTestCase):

    def test_frozen_values_of_the_transform(self):
        code = make_code([True, True, False, False])
        disclosure = alice_disclose(code, np.array([1, 1, 1, 1]), block_id=3)
        np.testing.assert_array_equal(disclosure.frozen_values, [0, 0])
        self.assertEqual(disclosure.block_id, 3)
        self.assertEqual(disclosure.leakage_bits, 2 + HASH_BITS)

    def test_rate_one_code_discloses_nothing(self):
        code = make_code(np.zeros(16, dtype=bool))
        self.assertEqual(alice_disclose(code, np.ones(16)).frozen_values.size, 0)

    def test_rate_zero_code_discloses_the_whole_transform(self):
        code = make_code(np.ones(16, dtype=bool))
        x = np.random.default_rng(0).integers(0, 2, 16, dtype=np.uint8)
        np.testing.assert_array_equal(alice_disclose(code, x).frozen_values, polar_transform(x).bits)

    def test_length_mismatch(self):
        with self.assertRaises(CodeMismatchError):
            alice_disclose(make_code([True, False]), np.zeros(4))

    def test_hash_is_keyed_by_block(self):
        x = np.random.default_rng(1).integers(0, 2, 256, dtype=np.uint8)
        self.assertEqual(verification_hash(x, 5), verification_hash(x.copy(), 5))
        self.assertNotEqual(verification_hash(x, 5), verification_hash(x, 6))
        y = x.copy()
        y[17] ^= 1
        self.assertNotEqual(verification_hash(x, 5), verification_hash(y, 5))


class BobDecodeTests(SimpleTestCase):

    def setUp(self):
        self.code = random_code(8, 96, seed=2)
        self.x = np.random.default_rng(3).integers(0, 2, 256, dtype=np.uint8)
        self.disclosure = alice_disclose(self.code, self.x, block_id=9)

    def test_noiseless_observations_are_verified(self):
        for representation in Representation:
            with self.subTest(representation=str(representation)):
                result = bob_decode(self.code, self.x, Bsc(0.0), self.disclosure.frozen_values,
                                    self.disclosure.verification_hash, block_id=9, representation=representation)
                self.assertIs(result.outcome, Outcome.VERIFIED)
                np.testing.assert_array_equal(result.x_hat, self.x)
                self.assertGreaterEqual(result.decode_seconds, 0.0)

    def test_corrupted_disclosure_is_discarded(self):
        frozen_values = self.disclosure.frozen_values.copy()
        frozen_values[0] ^= 1
        result = bob_decode(self.code, self.x, Bsc(0.0), frozen_values, self.disclosure.verification_hash, block_id=9)
        self.assertIs(result.outcome, Outcome.DISCARDED)

    def test_wrong_block_id_is_discarded(self):
        result = bob_decode(self.code, self.x, Bsc(0.0), self.disclosure.frozen_values,
                            self.disclosure.verification_hash, block_id=10)
        self.assertIs(result.outcome, Outcome.DISCARDED)

    def test_channel_family_mismatch(self):
        with self.assertRaises(CodeMismatchError):
            Reconciler(self.code, BiAwgn(1.0))

    def test_observation_length_mismatch(self):
        with self.assertRaises(CodeMismatchError):
            Reconciler(self.code, Bsc(0.0)).reconcile(self.x[:128], self.disclosure)

    def test_verified_blocks_are_correct(self):
        channel = Bsc(0.05)
        code, _ = construct(channel, 8, 0.1)
        reconciler = Reconciler(code, channel)
        rng = np.random.default_rng(4)
        verified = 0
        for block_id in range(50):
            x = rng.integers(0, 2, code.block_size, dtype=np.uint8)
            result = reconciler.reconcile(channel.transmit(x, rng), alice_disclose(code, x, block_id))
            if result.outcome is Outcome.VERIFIED:
                verified += 1
                np.testing.assert_array_equal(result.x_hat, x)
        self.assertGreater(verified, 25)


class SessionTests(SimpleTestCase):

    def test_open_session_is_pending(self):
        code = make_code([True, False, False, False])
        session = ReconciliationSession.open(code, Role.ALICE, Disclosure(4, np.array([1], dtype=np.uint8), 77))
        self.assertIs(session.outcome, Outcome.PENDING)
        self.assertEqual(session.block_id, 4)
        self.assertEqual(session.verification, 77)
        self.assertIs(session.reference, Role.ALICE)

    def test_settle_once(self):
        session = settled_session(make_code([True, False]), Outcome.DISCARDED)
        self.assertIs(session.outcome, Outcome.DISCARDED)
        with self.assertRaises(SessionStateError):
            session.settle(Outcome.VERIFIED)

    def test_cannot_settle_to_pending(self):
        code = make_code([True, False])
        session = ReconciliationSession.open(code, Role.BOB, alice_disclose(code, np.zeros(2)))
        with self.assertRaises(SessionStateError):
            session.settle(Outcome.PENDING)

    def test_settle_is_logged(self):
        with self.assertLogs('reconciliation', level='INFO') as logs:
            settled_session(make_code([True, True, False, False]), block_id=12)
        self.assertIn('block 12: verified, 66 bits leaked', logs.output[-1])


class LeakageReportTests(SimpleTestCase):

    def test_all_frozen_code(self):
        report = leakage_report(settled_session(make_code(np.ones(4, dtype=bool))))
        self.assertEqual(report.leakage_bits, 68)
        self.assertFalse(report.non_physical)

    def test_pending_session_rejected(self):
        code = make_code([True, False])
        session = ReconciliationSession.open(code, Role.BOB, alice_disclose(code, np.zeros(2)))
        with self.assertRaises(SessionStateError):
            leakage_report(session)

    def test_effective_efficiency(self):
        n = 16
        size = 1 << n
        reference = capacity(Bsc(0.02))
        mask = np.zeros(size, dtype=bool)
        mask[:size - round(0.935 * reference * size)] = True
        report = leakage_report(settled_session(make_code(mask, Bsc(0.02))))
        self.assertAlmostEqual(report.effective_beta, 0.935 - HASH_BITS / (size * reference), delta=1e-4)
        self.assertFalse(report.non_physical)

    def test_rate_one_code_is_not_physical(self):
        session = settled_session(make_code(np.zeros(1024, dtype=bool), Bsc(0.02)))
        with self.assertLogs('reconciliation', level='WARNING'):
            report = leakage_report(session)
        self.assertTrue(report.non_physical)
        self.assertGreater(report.effective_beta, 1.0)
        self.assertEqual(report.leakage_bits, HASH_BITS)
