import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from ..src.scripts.channel import (BiAwgn, Bsc, ChannelKind, binary_entropy, capacity, channel_llr,
                                   gaussian_mutual_information, inverse_binary_entropy, parse_channel,
                                   read_observations, transmit, write_observations)
from ..src.scripts.errors import ChannelParameterError


class ChannelParsingTests(SimpleTestCase):

    def test_parse_bsc(self):
        channel = parse_channel('bsc:0.02')
        self.assertEqual(channel, Bsc(0.02))
        self.assertIs(channel.kind, ChannelKind.BSC)
        self.assertEqual(str(channel), 'bsc:0.02')

    def test_parse_biawgn(self):
        self.assertEqual(parse_channel('BIAWGN:1.097'), BiAwgn(1.097))

    def test_malformed_spec(self):
        for spec in ('bsc', 'awgn:1', 'bsc:-0.1', 'bsc:abc', ''):
            with self.subTest(spec=spec), self.assertRaises(ValueError):
                parse_channel(spec)

    def test_out_of_range_parameters(self):
        with self.assertRaises(ChannelParameterError):
            Bsc(0.5)
        with self.assertRaises(ChannelParameterError):
            Bsc(-0.01)
        with self.assertRaises(ChannelParameterError):
            BiAwgn(0.0)
        with self.assertRaises(ChannelParameterError):
            BiAwgn(math.inf)


class CapacityTests(SimpleTestCase):

    def test_binary_entropy(self):
        self.assertAlmostEqual(binary_entropy(0.5), 1.0, places=12)
        self.assertEqual(binary_entropy(0.0), 0.0)
        self.assertEqual(binary_entropy(1.0), 0.0)
        self.assertAlmostEqual(binary_entropy(0.02), 0.14144, delta=1e-5)
        with self.assertRaises(ChannelParameterError):
            binary_entropy(1.5)

    def test_inverse_binary_entropy(self):
        p = np.array([0.0, 0.02, 0.11, 0.3, 0.5])
        np.testing.assert_allclose(inverse_binary_entropy(binary_entropy(p)), p, atol=1e-4)

    def test_bsc_capacity(self):
        self.assertEqual(capacity(Bsc(0.0)), 1.0)
        self.assertAlmostEqual(capacity(Bsc(0.02)), 0.85856, delta=1e-4)
        for p in np.linspace(0.0, 0.49, 50):
            self.assertAlmostEqual(capacity(Bsc(p)) + binary_entropy(p), 1.0, places=12)

    def test_bsc_capacity_decreases_with_p(self):
        values = [capacity(Bsc(p)) for p in np.linspace(0.0, 0.49, 50)]
        self.assertTrue(all(high > low for high, low in zip(values, values[1:])))

    def test_biawgn_capacity(self):
        self.assertAlmostEqual(capacity(BiAwgn(0.029)), 0.02063, delta=1e-3)
        values = [capacity(BiAwgn(snr)) for snr in (0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)]
        self.assertTrue(all(high > low for low, high in zip(values, values[1:])))
        for snr in (0.029, 0.161, 1.097, 10.0):
            self.assertLessEqual(capacity(BiAwgn(snr)), min(1.0, gaussian_mutual_information(snr)) + 1e-9)

    def test_gaussian_mutual_information(self):
        self.assertAlmostEqual(gaussian_mutual_information(1.0), 0.5, places=12)
        self.assertAlmostEqual(gaussian_mutual_information(1.097), 0.53414, delta=1e-5)
        with self.assertRaises(ChannelParameterError):
            gaussian_mutual_information(0.0)


class TransmitTests(SimpleTestCase):

    def test_bsc_flip_fraction(self):
        bits = np.zeros(1_000_000, dtype=np.uint8)
        received = transmit(Bsc(0.02), bits, seed=7)
        self.assertEqual(received.dtype, np.uint8)
        self.assertTrue(0.0186 <= received.mean() <= 0.0214)

    def test_noiseless_bsc_is_identity(self):
        bits = np.random.default_rng(1).integers(0, 2, 4096, dtype=np.uint8)
        np.testing.assert_array_equal(transmit(Bsc(0.0), bits, seed=3), bits)

    def test_high_snr_biawgn(self):
        bits = np.random.default_rng(2).integers(0, 2, 4096, dtype=np.uint8)
        samples = transmit(BiAwgn(1e6), bits, seed=3)
        np.testing.assert_allclose(samples, 1.0 - 2.0 * bits, atol=0.01)

    def test_deterministic_for_a_seed(self):
        bits = np.random.default_rng(3).integers(0, 2, 1024, dtype=np.uint8)
        for channel in (Bsc(0.1), BiAwgn(0.5)):
            with self.subTest(channel=str(channel)):
                np.testing.assert_array_equal(transmit(channel, bits, 11), transmit(channel, bits, 11))

    def test_empty_block_rejected(self):
        with self.assertRaises(ValueError):
            transmit(Bsc(0.1), np.array([], dtype=np.uint8), seed=0)


class LlrTests(SimpleTestCase):

    def test_bsc_llr(self):
        self.assertAlmostEqual(channel_llr(Bsc(0.1), 0), math.log(9.0), places=12)
        self.assertAlmostEqual(channel_llr(Bsc(0.1), 1), -math.log(9.0), places=12)

    def test_noiseless_bsc_llr_is_saturated(self):
        np.testing.assert_array_equal(channel_llr(Bsc(0.0), np.array([0, 1])), [30.0, -30.0])

    def test_biawgn_llr(self):
        self.assertAlmostEqual(channel_llr(BiAwgn(0.5), 1.0), 1.0, places=12)
        np.testing.assert_array_equal(channel_llr(BiAwgn(100.0), np.array([1.0, -1.0])), [30.0, -30.0])

    def test_llr_symmetry(self):
        channel = BiAwgn(0.8)
        y = np.linspace(-3.0, 3.0, 61)
        np.testing.assert_allclose(channel_llr(channel, y), -channel_llr(channel, -y), atol=1e-12)
        self.assertAlmostEqual(channel_llr(channel, 0.0), 0.0)


class ObservationFileTests(SimpleTestCase):

    def test_blocks_read_back_by_index(self):
        rng = np.random.default_rng(5)
        with tempfile.TemporaryDirectory() as directory:
            for channel in (Bsc(0.05), BiAwgn(1.0)):
                with self.subTest(channel=str(channel)):
                    path = Path(directory) / f'{channel.kind}.bin'
                    blocks = [transmit(channel, rng.integers(0, 2, 64, dtype=np.uint8), rng) for _ in range(3)]
                    for block in blocks:
                        write_observations(path, channel, block)
                    np.testing.assert_array_equal(read_observations(path, channel, 64, 1), blocks[1])

    def test_short_file(self):
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / 'short.bin'
            write_observations(path, Bsc(0.1), np.zeros(64, dtype=np.uint8))
            with self.assertRaises(EOFError):
                read_observations(path, Bsc(0.1), 64, 1)
