import itertools
import unittest
import warnings

import numpy as np

from src import ostrovskywaves as ow
from tests.helper import FULL_MATRIX


EXPONENTS = {
    'signed': (2.0, 3.0, 4.0),
    'abs': (1.5, 2.0, 2.5),
}
LAMBDAS = (0.5, 1.0, 2.0)
NODES = 1024


def cells():
    for family, exponents in EXPONENTS.items():
        for p, lam in itertools.product(exponents, LAMBDAS):
            yield family, p, lam


@unittest.skipUnless(FULL_MATRIX, 'set OSTROVSKY_FULL_MATRIX=1 to run the reference-resolution matrix')
class TestReferenceMatrix(unittest.TestCase):
    """Every cell of the reference matrix at n = 1024 on the automatic box."""

    @classmethod
    def setUpClass(cls) -> None:
        cls.profiles = {}

        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)

            for family, p, lam in cells():
                cls.profiles[family, p, lam] = ow.solveOnAutoGrid(ow.ModelFamily.fromName(family), p, lam, NODES)

    def test_profiles(self):
        for key, profile in self.profiles.items():
            with self.subTest(cell=key):
                self.assertLessEqual(profile.elResidual, 1e-8)
                self.assertLess(profile.omega, 2.0)
                self.assertLess(profile.energy, profile.lam)
                self.assertAlmostEqual(ow.normL2(profile.phi) ** 2, profile.lam, places=10)
                self.assertLessEqual(ow.boundaryAmplitudeRatio(profile.phi), 1e-4)

    def test_identities(self):
        for key, profile in self.profiles.items():
            with self.subTest(cell=key):
                self.assertLessEqual(ow.pohozaevResiduals(profile).worst, 1e-4)
                self.assertLessEqual(ow.pohozaevFourthOrder(profile).worst, 1e-4)
                self.assertLessEqual(ow.elResidualFourthOrder(profile), 1e-6)
                self.assertTrue(ow.fitDecay(profile).withinTolerance(0.1))

    def test_spectra(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)

            for key, profile in self.profiles.items():
                with self.subTest(cell=key):
                    report = ow.analyzeStability(profile)

                    self.assertEqual(report.nMinus, 1)
                    self.assertLessEqual(report.kernelOverlap, 1e-4)
                    self.assertIsNotNone(report.vkValue)
                    self.assertLess(report.vkValue, 0.0)
                    self.assertLessEqual(report.maxRealFull, 1e-6 * report.spectralScale)
                    self.assertIs(report.verdict, ow.StabilityVerdict.Stable)

    def test_costCurves(self):
        for family, exponents in EXPONENTS.items():
            for p in exponents:
                with self.subTest(family=family, p=p):
                    values = [self.profiles[family, p, lam].energy for lam in LAMBDAS]
                    ratios = np.array(values) / np.array(LAMBDAS)

                    self.assertTrue(np.all(np.diff(ratios) < 0.0))
                    self.assertLess(values[2], 2.0 * values[1])


@unittest.skipUnless(FULL_MATRIX, 'set OSTROVSKY_FULL_MATRIX=1 to run the long-horizon dynamics')
class TestLongHorizonDynamics(unittest.TestCase):
    """Traveling-wave and perturbed runs for the reference wave at n = 1024 over long horizons."""

    @classmethod
    def setUpClass(cls) -> None:
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)
            cls.profile = ow.solveOnAutoGrid(ow.ModelFamily.SignedPower, 2.0, 1.0, NODES)

    def test_travelingWave(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)
            error, trace = ow.travelingWaveError(self.profile, 10.0, 1e-3)

        self.assertLessEqual(error, 1e-4)
        self.assertLessEqual(trace.massDrift, 1e-9)
        self.assertLessEqual(trace.energyDrift, 1e-6)

    def test_perturbation(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)
            result = ow.perturbationExperiment(self.profile, 1e-3, 50.0, 1e-3, seed=7)

        self.assertIsNone(result.trace.blowupTime)
        self.assertLessEqual(result.ratio, 10.0)
        self.assertAlmostEqual(result.trace.times[-1], 50.0)


if __name__ == '__main__':
    unittest.main()
