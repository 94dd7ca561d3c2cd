import numpy as np
from django.test import SimpleTestCase

from ..src.scripts.channel import gaussian_mutual_information
from ..src.scripts.key_rate import KeyRateParams, key_rate, theoretical_key_rate


class KeyRateTests(SimpleTestCase):

    def test_ideal_system(self):
        rate = key_rate(KeyRateParams(beta=1.0, mutual_info=1.0, holevo=0.0))
        self.assertEqual(rate.final, 1.0)
        self.assertEqual(rate.theoretical, 1.0)
        self.assertFalse(rate.no_secret_key)

    def test_throughput_ratio(self):
        rate = key_rate(KeyRateParams(beta=1.0, mutual_info=0.5, holevo=0.4, alpha=0.18))
        self.assertAlmostEqual(rate.real, 0.1, places=12)
        self.assertAlmostEqual(rate.final, 0.018, places=12)

    def test_every_frame_discarded(self):
        rate = key_rate(KeyRateParams(beta=0.95, mutual_info=0.8, holevo=0.1, fer=1.0))
        self.assertEqual(rate.final, 0.0)
        self.assertTrue(rate.no_secret_key)

    def test_gaussian_link(self):
        rate = key_rate(KeyRateParams(beta=0.9, mutual_info=gaussian_mutual_information(1.097), holevo=0.40,
                                      alpha=0.18, fer=0.1))
        self.assertAlmostEqual(rate.final, 0.01302, delta=1e-4)

    def test_no_key_regime(self):
        rate = key_rate(KeyRateParams(beta=0.5, mutual_info=0.5, holevo=0.4))
        self.assertLess(rate.final, 0.0)
        self.assertTrue(rate.no_secret_key)
        self.assertAlmostEqual(theoretical_key_rate(0.5, 0.4), 0.1)

    def test_invalid_parameters(self):
        for overrides in ({'beta': 1.2}, {'alpha': -0.1}, {'fer': 2.0}, {'mutual_info': -1.0},
                          {'holevo': float('nan')}, {'mutual_info': float('inf')}):
            arguments = {'beta': 0.9, 'mutual_info': 0.5, 'holevo': 0.1, **overrides}
            with self.subTest(**overrides), self.assertRaises(ValueError):
                KeyRateParams(**arguments)

    def test_chain_identities(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            alpha, beta, fer = rng.random(3)
            mutual_info, holevo = rng.random(2) * 2.0
            params = KeyRateParams(beta=beta, mutual_info=mutual_info, holevo=holevo, alpha=alpha, fer=fer)
            rate = key_rate(params)
            self.assertAlmostEqual(rate.final, rate.system * (1.0 - fer), delta=1e-12)
            self.assertAlmostEqual(rate.final, rate.real * alpha * (1.0 - fer), delta=1e-12)
            ideal = key_rate(KeyRateParams(beta=beta, mutual_info=mutual_info, holevo=holevo))
            self.assertAlmostEqual(ideal.final, rate.real, delta=1e-12)
            lossless = key_rate(KeyRateParams(beta=beta, mutual_info=mutual_info, holevo=holevo, alpha=alpha))
            self.assertAlmostEqual(lossless.final, rate.system, delta=1e-12)

    def test_monotonicity(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            alpha, beta, fer = rng.random(3) * 0.9
            mutual_info = 0.2 + rng.random()
            holevo = rng.random() * 0.1
            base = KeyRateParams(beta=beta, mutual_info=mutual_info, holevo=holevo, alpha=alpha, fer=fer)
            rate = key_rate(base).final
            # positive regime; with K_real < 0 a larger alpha makes K smaller
            if rate <= 0.0:
                continue
            self.assertGreaterEqual(key_rate(self.bump(base, alpha=alpha + 0.05)).final, rate)
            self.assertGreaterEqual(key_rate(self.bump(base, beta=beta + 0.05)).final, rate)
            self.assertGreaterEqual(key_rate(self.bump(base, mutual_info=mutual_info + 0.1)).final, rate)
            self.assertLessEqual(key_rate(self.bump(base, fer=fer + 0.05)).final, rate)
            self.assertLessEqual(key_rate(self.bump(base, holevo=holevo + 0.05)).final, rate)

    @staticmethod
    def bump(params, **changes):
        return KeyRateParams(**{**params.__dict__, **changes})
