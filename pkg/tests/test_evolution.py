import unittest
import warnings

import numpy as np

from src import ostrovskywaves as ow
from tests.helper import ProfileUnitTest, smoothField


class TestSymbols(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = ow.makeGrid(np.pi, 64)

    def test_dealiasingMask(self):
        mask = ow.dealiasingMask(self.grid)

        self.assertEqual(mask.size, 33)
        self.assertEqual(int(np.sum(mask)), 22)
        self.assertEqual(mask[21], 1.0)
        self.assertEqual(mask[22], 0.0)

    def test_linearSymbol(self):
        symbol = ow.linearSymbol(self.grid)

        self.assertEqual(symbol[0], 0.0)
        self.assertAlmostEqual(symbol[1], -2j)
        self.assertAlmostEqual(symbol[2], -1j * (8.0 + 0.5))
        np.testing.assert_allclose(symbol.real, 0.0)

    def test_stepBound(self):
        self.assertAlmostEqual(ow.stepBound(self.grid, 2.0, 3.0, 0.01), 1.28)


class TestLinearFlow(unittest.TestCase):
    def test_singleMode(self):
        grid = ow.makeGrid(np.pi, 64)
        u0 = ow.Field.fromFunction(grid, np.sin, True)
        trace = ow.integrate(u0, ow.ModelFamily.SignedPower, 2.0, 1.0, 0.1, nonlinear=False)

        np.testing.assert_allclose(trace.finalState.values, np.sin(np.array(grid.nodes) - 2.0), atol=1e-12)
        self.assertEqual(len(trace.times), 11)
        self.assertAlmostEqual(trace.times[-1], 1.0)

    def test_massConserved(self):
        grid = ow.makeGrid(20.0, 256)
        u0 = smoothField(grid, 5)
        trace = ow.integrate(u0, ow.ModelFamily.SignedPower, 2.0, 2.0, 0.01, nonlinear=False)

        self.assertLessEqual(trace.massDrift, 1e-12)
        self.assertIsNone(trace.orbitalDistance)
        self.assertIsNone(trace.blowupTime)

    def test_observer(self):
        grid = ow.makeGrid(np.pi, 64)
        u0 = ow.Field.fromFunction(grid, np.sin, True)
        seen = []

        ow.integrate(u0, ow.ModelFamily.SignedPower, 2.0, 1.0, 0.1, sampleEvery=5, nonlinear=False,
                     observer=lambda t, u: seen.append(t))

        np.testing.assert_allclose(seen, [0.0, 0.5, 1.0])


class TestIntegrateArguments(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = ow.makeGrid(np.pi, 64)
        self.u0 = ow.Field.fromFunction(self.grid, np.sin, True)

    def test_timeStepTooLarge(self):
        with self.assertRaises(ow.TimeStepTooLargeError):
            ow.integrate(self.u0 * 10.0, ow.ModelFamily.SignedPower, 2.0, 1.0, 0.5)

    def test_stepsMustDivide(self):
        with self.assertRaises(ow.InvalidOptionsError):
            ow.integrate(self.u0, ow.ModelFamily.SignedPower, 2.0, 1.0, 0.3, nonlinear=False)

        with self.assertRaises(ow.InvalidOptionsError):
            ow.integrate(self.u0, ow.ModelFamily.SignedPower, 2.0, 0.0, 0.1, nonlinear=False)

    def test_meanFree(self):
        with self.assertRaises(ow.NonZeroMeanError):
            ow.integrate(ow.Field(self.grid, np.ones(64)), ow.ModelFamily.SignedPower, 2.0, 1.0, 0.1)

    def test_traceValidation(self):
        with self.assertRaises(ValueError):
            ow.EvolutionTrace(np.array([0.0, 0.0]), np.ones(2), np.ones(2), None, self.u0)

        with self.assertRaises(ValueError):
            ow.EvolutionTrace(np.array([0.0, 1.0]), np.ones(2), np.ones(3), None, self.u0)


class TestNoise(unittest.TestCase):
    def test_smoothNoise(self):
        grid = ow.makeGrid(20.0, 256)
        noise = ow.smoothNoise(grid, 3)

        self.assertAlmostEqual(ow.normL2(noise), 1.0, places=12)
        self.assertTrue(noise.meanFree)
        np.testing.assert_array_equal(noise.values, ow.smoothNoise(grid, 3).values)
        self.assertGreater(ow.normL2(noise - ow.smoothNoise(grid, 4)), 0.1)


class TestOrbitalDistance(ProfileUnitTest):
    def test_subgridShift(self):
        phi = self.profile.phi
        offset = 3.7 * self.profile.grid.spacing

        distance, shift = ow.orbitalDistance(phi.shifted(offset), phi)

        self.assertLessEqual(distance, 1e-10)
        self.assertAlmostEqual(shift, offset, places=8)

    def test_negativeShift(self):
        phi = self.profile.phi
        offset = -11.25 * self.profile.grid.spacing

        distance, shift = ow.orbitalDistance(phi.shifted(offset), phi)

        self.assertLessEqual(distance, 1e-10)
        self.assertAlmostEqual(shift, offset, places=8)

    def test_shapeChange(self):
        phi = self.profile.phi
        distance, _ = ow.orbitalDistance(phi * 1.1, phi)

        self.assertAlmostEqual(distance, 0.1 * ow.normL2(phi), places=8)


class TestTravelingWave(ProfileUnitTest):
    def test_profileTranslates(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)
            error, trace = ow.travelingWaveError(self.profile, 1.0, 1e-3)

        self.assertLessEqual(error, 1e-4)
        self.assertLessEqual(trace.maxOrbitalDistance, 1e-4 * ow.normL2(self.profile.phi))
        self.assertLessEqual(trace.massDrift, 1e-9)
        self.assertLessEqual(trace.energyDrift, 1e-6)

    def test_fourthOrderInTime(self):
        phi = self.profile.phi
        largest = 1.0 / ow.stepBound(phi.grid, self.p, phi.maxAbs, 1.0)
        steps = 2 ** int(np.ceil(np.log2(4.0 / largest)))
        finals = []

        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)

            for refinement in (1, 2, 4):
                trace = ow.integrate(phi, self.profile.family, self.p, 1.0, 1.0 / (steps * refinement))
                finals.append(trace.finalState)

        # successive differences shrink by 2^4 for a fourth-order stepper
        coarse = ow.normL2(finals[0] - finals[1])
        fine = ow.normL2(finals[1] - finals[2])

        self.assertGreater(fine, 0.0)
        self.assertGreaterEqual(coarse / fine, 8.0)

    def test_zeroDelta(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)
            result = ow.perturbationExperiment(self.profile, 0.0, 0.5, 1e-3, seed=1)

        self.assertTrue(result.travelingWaveOnly)
        self.assertLessEqual(result.ratio, 1e-4)
        self.assertTrue(result.toJson()['traveling_wave_only'])


class TestPerturbation(ProfileUnitTest):
    @classmethod
    def setUpClass(cls) -> None:
        super().setUpClass()

        with warnings.catch_warnings():
            warnings.simplefilter('ignore', ow.OstrovskyWarning)
            cls.result = ow.perturbationExperiment(cls.profile, 1e-3, 2.0, 1e-3, seed=7)

    def test_orbitallyStable(self):
        self.assertLessEqual(self.result.ratio, 10.0)
        self.assertIsNone(self.result.trace.blowupTime)
        self.assertFalse(self.result.travelingWaveOnly)

    def test_initialDistance(self):
        distance = self.result.trace.orbitalDistance

        self.assertIsNotNone(distance)
        self.assertLessEqual(distance[0], 1e-3 * ow.normL2(self.profile.phi) * (1.0 + 1e-9))

    def test_toJson(self):
        data = self.result.toJson()

        self.assertIsInstance(self.result, ow.JsonRepresentable)
        self.assertEqual(data['seed'], 7)
        self.assertEqual(data['delta'], 1e-3)
        self.assertIsNone(data['blowup_time'])
        self.assertAlmostEqual(data['final_time'], 2.0)
        self.assertEqual(data['samples'], len(self.result.trace.times))

    def test_badDelta(self):
        for delta in (-0.1, 0.2):
            with self.assertRaises(ow.BadDeltaError):
                ow.perturbationExperiment(self.profile, delta, 1.0, 1e-3, seed=0)


if __name__ == '__main__':
    unittest.main()
