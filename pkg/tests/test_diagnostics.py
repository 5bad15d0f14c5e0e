import unittest

import numpy as np

from src import ostrovskywaves as ow
from src.ostrovskywaves.helper import relativeDifference
from tests.helper import ProfileUnitTest


class TestRelativeDifference(unittest.TestCase):
    def test_values(self):
        self.assertEqual(relativeDifference(0.0, 0.0), 0.0)
        self.assertEqual(relativeDifference(1.0, 1.0), 0.0)
        self.assertAlmostEqual(relativeDifference(1.0, 3.0), 0.5)
        self.assertAlmostEqual(relativeDifference(1.0, -1.0), 1.0)


class TestPohozaev(ProfileUnitTest):
    def impostor(self, elResidual: float = 0.0) -> ow.WaveProfile:
        grid = self.profile.grid
        x = np.array(grid.nodes)
        phi = ow.projectZeroMean(ow.Field(grid, np.exp(-x ** 2) * np.cos(x)))
        phi = phi * np.sqrt(self.lam) / ow.normL2(phi)
        return ow.WaveProfile(self.profile.family, self.p, self.lam, 0.0, phi, elResidual)

    def test_secondOrder(self):
        report = ow.pohozaevResiduals(self.profile)

        self.assertLessEqual(report.r1, 1e-4)
        self.assertLessEqual(report.r2, 1e-4)
        self.assertEqual(report.order, 2)
        self.assertIsNone(report.r1Derivative)
        self.assertIn('signed', report.variantNote)

    def test_fourthOrder(self):
        report = ow.pohozaevFourthOrder(self.profile)

        self.assertLessEqual(report.worst, 1e-4)
        self.assertEqual(report.order, 4)

    def test_impostorFails(self):
        report = ow.pohozaevResiduals(self.impostor())
        self.assertGreaterEqual(report.worst, 1e-2)

    def test_notConverged(self):
        with self.assertRaises(ow.NotConvergedError):
            ow.pohozaevResiduals(self.impostor(1e-3))

        with self.assertRaises(ow.NotConvergedError):
            ow.pohozaevFourthOrder(self.impostor(1e-3))

    def test_toJson(self):
        data = ow.pohozaevResiduals(self.profile).toJson()

        self.assertEqual(set(data), {'r1', 'r2', 'variantNote', 'order', 'r1Derivative', 'r2Derivative'})

    def test_invalidReport(self):
        with self.assertRaises(ValueError):
            ow.PohozaevReport(-1.0, 0.0, '')

        with self.assertRaises(ValueError):
            ow.PohozaevReport(0.0, float('nan'), '')


class TestAbsPohozaev(ProfileUnitTest):
    family = 'abs'

    def test_bothForms(self):
        report = ow.pohozaevResiduals(self.profile)

        self.assertLessEqual(report.worst, 1e-4)
        self.assertIsNotNone(report.r1Derivative)
        self.assertIsNotNone(report.r2Derivative)
        self.assertIn('abs', report.variantNote)

    def test_derivativeFormMeasuresPairing(self):
        report = ow.pohozaevResiduals(self.profile)
        phi = self.profile.phi
        gradientTerm = ow.normL2(ow.deriv(phi, 1)) ** 2
        inverseTerm = ow.normL2(ow.deriv(phi, -1)) ** 2
        pairing = ow.ModelFamily.AbsPower.nonlinearPairing(phi, self.p)
        omegaMass = self.profile.omega * ow.normL2(phi) ** 2

        # omega lam = G + I - P holds, so dropping P leaves exactly P behind
        self.assertAlmostEqual(report.r2Derivative, relativeDifference(omegaMass, omegaMass + pairing), delta=1e-6)
        self.assertAlmostEqual(report.r1Derivative, relativeDifference(gradientTerm, inverseTerm), places=12)
        self.assertGreater(report.r2Derivative, 1e-3)

    def test_decay(self):
        self.assertTrue(ow.fitDecay(self.profile).withinTolerance(0.1))


class TestDecayFit(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = ow.makeGrid(30.0, 1024)
        self.x = np.array(self.grid.nodes)

    def test_dampedOscillation(self):
        field = ow.Field(self.grid, np.exp(-0.8 * np.abs(self.x)) * np.cos(0.7 * self.x))
        fit = ow.fitDecayRate(field, 0.8)

        self.assertAlmostEqual(fit.kappaLeft, 0.8, places=6)
        self.assertAlmostEqual(fit.kappaRight, 0.8, places=6)
        self.assertLess(fit.deviation, 1e-6)
        self.assertAlmostEqual(fit.windowStart, 3.0 / 0.8)
        self.assertAlmostEqual(fit.windowEnd, 10.0 / 0.8)

    def test_pureExponential(self):
        field = ow.Field(self.grid, np.exp(-np.abs(self.x)))
        fit = ow.fitDecayRate(field, 1.0, 0.0)

        self.assertLessEqual(abs(fit.kappaFit - 1.0), 1e-3)

    def test_mismatchedReference(self):
        field = ow.Field(self.grid, np.exp(-0.8 * np.abs(self.x)) * np.cos(0.7 * self.x))
        fit = ow.fitDecayRate(field, 0.6)

        self.assertAlmostEqual(fit.kappaFit, 0.8, places=6)
        self.assertFalse(fit.withinTolerance(0.1))

    def test_windowTooSmall(self):
        grid = ow.makeGrid(5.0, 256)
        field = ow.Field(grid, np.exp(-np.abs(np.array(grid.nodes))))

        with self.assertRaises(ow.WindowTooSmallError):
            ow.fitDecayRate(field, 0.5)

    def test_windowTooNoisy(self):
        field = ow.Field(self.grid, np.exp(-8.0 * np.abs(self.x)))

        with self.assertRaises(ow.WindowTooNoisyError):
            ow.fitDecayRate(field, 0.5)

    def test_toJson(self):
        field = ow.Field(self.grid, np.exp(-0.8 * np.abs(self.x)) * np.cos(0.7 * self.x))
        data = ow.fitDecayRate(field, 0.8).toJson()

        self.assertIn('kappaFit', data)
        self.assertIn('ratio', data)
        self.assertAlmostEqual(data['kappaReference'], 0.8)


class TestProfileDecay(ProfileUnitTest):
    def test_matchesLinearTheory(self):
        fit = ow.fitDecay(self.profile)

        self.assertTrue(fit.withinTolerance(0.1))
        self.assertEqual(fit.kappaReference, ow.decayRateKappa(self.profile.omega))


class TestSamplingCheck(unittest.TestCase):
    @staticmethod
    def gaussian(x):
        return np.exp(-x ** 2)

    @staticmethod
    def gaussianSlope(x):
        return -2.0 * x * np.exp(-x ** 2)

    def test_inequalityHolds(self):
        for epsilon in (0.25, 0.5, 1.0):
            for N in (2, 4, 10):
                report = ow.samplingCheck(self.gaussian, epsilon, N, self.gaussianSlope)

                self.assertTrue(report.passed)
                self.assertAlmostEqual(report.fraction, np.sqrt(np.pi) / N, places=8)
                self.assertAlmostEqual(report.rhsBound, epsilon / N * 2.0, places=6)

    def test_randomGaussianMixtures(self):
        rng = np.random.default_rng(2024)

        for case in range(100):
            weights = rng.uniform(-1.0, 1.0, 3)
            rates = rng.uniform(0.5, 2.0, 3)
            centers = rng.uniform(-3.0, 3.0, 3)

            def mixture(x, weights=weights, rates=rates, centers=centers):
                shifted = np.subtract.outer(x, centers)
                return np.exp(-rates * shifted ** 2) @ weights

            def mixtureSlope(x, weights=weights, rates=rates, centers=centers):
                shifted = np.subtract.outer(x, centers)
                return (-2.0 * rates * shifted * np.exp(-rates * shifted ** 2)) @ weights

            epsilon = float(rng.uniform(0.01, 0.5))
            N = int(rng.choice([2, 3, 5, 8]))

            with self.subTest(case=case, epsilon=epsilon, N=N):
                report = ow.samplingCheck(mixture, epsilon, N, mixtureSlope)
                total = float(np.sum(weights * np.sqrt(np.pi / rates)))

                self.assertTrue(report.passed)
                self.assertAlmostEqual(report.fraction, total / N, places=8)

    def test_sampledMassConverges(self):
        errors = []

        for epsilon in (2.0, 1.5, 1.0, 0.5):
            report = ow.samplingCheck(self.gaussian, epsilon, 4, self.gaussianSlope)

            self.assertTrue(report.passed)
            errors.append(abs(report.sampled - np.sqrt(np.pi) / 4))

        self.assertGreater(errors[0], 1e-3)
        self.assertTrue(all(later < earlier for earlier, later in zip(errors[:3], errors[1:3])))
        self.assertLessEqual(errors[3], 1e-10)

    def test_finiteDifferenceSlope(self):
        exact = ow.samplingCheck(self.gaussian, 0.5, 4, self.gaussianSlope)
        approximate = ow.samplingCheck(self.gaussian, 0.5, 4)

        self.assertAlmostEqual(exact.rhsBound, approximate.rhsBound, places=6)
        self.assertEqual(exact.lhs, approximate.lhs)

    def test_badN(self):
        for N in (1, 0, 2.5, True):
            with self.assertRaises(ow.BadNError):
                ow.samplingCheck(self.gaussian, 0.5, N)

    def test_badEpsilon(self):
        for epsilon in (0.0, -1.0, float('nan'), float('inf')):
            with self.assertRaises(ow.BadEpsilonError):
                ow.samplingCheck(self.gaussian, epsilon, 4)

    def test_toJson(self):
        data = ow.samplingCheck(self.gaussian, 0.5, 4, self.gaussianSlope).toJson()

        self.assertTrue(data['passed'])
        self.assertEqual(data['N'], 4)


if __name__ == '__main__':
    unittest.main()
