import unittest

import numpy as np

from src import ostrovskywaves as ow
from tests.helper import smoothField, localizedField


class TestGrid(unittest.TestCase):
    def test_makeGrid(self):
        grid = ow.makeGrid(np.pi, 64)

        self.assertEqual(grid.n, 64)
        self.assertAlmostEqual(grid.length, 2 * np.pi)
        self.assertAlmostEqual(grid.spacing, 2 * np.pi / 64)
        self.assertEqual(grid.nodes.shape, (64,))
        self.assertAlmostEqual(grid.nodes[0], -np.pi)
        self.assertEqual(np.count_nonzero(grid.wavenumbers == 0.0), 1)
        self.assertEqual(grid.rwavenumbers.size, 33)
        self.assertAlmostEqual(grid.rwavenumbers[1], 1.0)
        self.assertAlmostEqual(grid.nyquist, 32.0)

    def test_invalidGrids(self):
        with self.assertRaises(ow.NonPowerOfTwoError):
            ow.makeGrid(10.0, 100)

        with self.assertRaises(ow.NonPowerOfTwoError):
            ow.makeGrid(10.0, 32)

        with self.assertRaises(ow.NonPositiveLengthError):
            ow.makeGrid(0.0, 64)

        with self.assertRaises(ow.NonPositiveLengthError):
            ow.makeGrid(-1.0, 64)

    def test_nodesReadOnly(self):
        grid = ow.makeGrid(5.0, 64)

        with self.assertRaises(ValueError):
            grid.nodes[0] = 1.0

    def test_checkSame(self):
        a = ow.makeGrid(5.0, 64)
        b = ow.makeGrid(5.0, 128)

        a.checkSame(ow.makeGrid(5.0, 64))

        with self.assertRaises(ow.GridMismatchError):
            a.checkSame(b)

        with self.assertRaises(ow.GridMismatchError):
            ow.Field.zeros(a) + ow.Field.zeros(b)


class TestField(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = ow.makeGrid(np.pi, 64)

    def test_meanFreeValidation(self):
        ow.Field.fromFunction(self.grid, np.sin, True)

        with self.assertRaises(ow.NonZeroMeanError):
            ow.Field(self.grid, np.ones(64), True)

    def test_nonFinite(self):
        values = np.zeros(64)
        values[3] = np.nan

        with self.assertRaises(ow.NonFiniteValueError):
            ow.Field(self.grid, values)

    def test_wrongShape(self):
        with self.assertRaises(ow.GridMismatchError):
            ow.Field(self.grid, np.zeros(63))

    def test_immutable(self):
        f = ow.Field.fromFunction(self.grid, np.sin)

        with self.assertRaises(ValueError):
            f.values[0] = 1.0

    def test_arithmetic(self):
        f = ow.Field.fromFunction(self.grid, np.sin, True)
        g = ow.Field.fromFunction(self.grid, np.cos, True)

        np.testing.assert_allclose((f + g).values, np.sin(self.grid.nodes) + np.cos(self.grid.nodes))
        np.testing.assert_allclose((f - g).values, np.sin(self.grid.nodes) - np.cos(self.grid.nodes))
        np.testing.assert_allclose((2.0 * f).values, 2.0 * np.sin(self.grid.nodes))
        np.testing.assert_allclose((-f).values, -np.sin(self.grid.nodes))
        self.assertTrue((f + g).meanFree)

    def test_shifted(self):
        f = ow.Field.fromFunction(self.grid, np.sin, True)
        shifted = f.shifted(0.7)

        np.testing.assert_allclose(shifted.values, np.sin(self.grid.nodes - 0.7), atol=1e-13)

    def test_reflected(self):
        f = ow.Field.fromFunction(self.grid, np.sin, True)
        np.testing.assert_allclose(f.reflected().values, -f.values, atol=1e-14)

    def test_evaluateAt(self):
        f = ow.Field.fromFunction(self.grid, np.sin, True)

        self.assertAlmostEqual(ow.evaluateAt(f, 0.3), np.sin(0.3), places=12)
        self.assertAlmostEqual(ow.evaluateAt(f, 0.3, 1), np.cos(0.3), places=12)
        self.assertAlmostEqual(ow.evaluateAt(f, 0.3, 2), -np.sin(0.3), places=12)


class TestCalculus(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = ow.makeGrid(np.pi, 64)
        self.sin = ow.Field.fromFunction(self.grid, np.sin, True)
        self.cos = ow.Field.fromFunction(self.grid, np.cos, True)

    def test_derivativeOfSine(self):
        np.testing.assert_allclose(ow.deriv(self.sin, 1).values, self.cos.values, atol=1e-10)
        np.testing.assert_allclose(ow.deriv(self.sin, 2).values, -self.sin.values, atol=1e-10)

    def test_antiderivativeOfCosine(self):
        np.testing.assert_allclose(ow.deriv(self.cos, -1).values, self.sin.values, atol=1e-10)
        np.testing.assert_allclose(ow.deriv(self.cos, -2).values, -self.cos.values, atol=1e-10)

    def test_orderZero(self):
        self.assertIs(ow.deriv(self.sin, 0), self.sin)

    def test_antiderivativeNeedsMeanFree(self):
        constant = ow.Field(self.grid, np.ones(64))

        with self.assertRaises(ow.NonZeroMeanError):
            ow.deriv(constant, -1)

    def test_inverseIdentity(self):
        grid = ow.makeGrid(20.0, 256)

        for seed in range(10):
            f = smoothField(grid, seed)

            for order in (1, 2, 3):
                back = ow.deriv(ow.deriv(f, order), -order)
                self.assertLessEqual(ow.normL2(back - f) / ow.normL2(f), 1e-10)

                forth = ow.deriv(ow.deriv(f, -order), order)
                self.assertLessEqual(ow.normL2(forth - f) / ow.normL2(f), 1e-10)

    def test_nyquistDroppedForOddOrders(self):
        symbol = ow.derivativeSymbol(self.grid, 1)
        self.assertEqual(symbol[-1], 0.0)
        self.assertEqual(symbol[0], 0.0)

        even = ow.derivativeSymbol(self.grid, 2)
        self.assertAlmostEqual(even[-1].real, -32.0 ** 2)

    def test_differentiationMatrix(self):
        grid = ow.makeGrid(10.0, 64)
        f = localizedField(grid, 3)

        for order in (1, 2, -1, -2, 4):
            matrix = ow.differentiationMatrix(grid, order)
            np.testing.assert_allclose(matrix @ f.values, ow.deriv(f, order).values, atol=1e-10)

    def test_projectZeroMean(self):
        f = ow.Field(self.grid, np.sin(self.grid.nodes) + 3.0)
        projected = ow.projectZeroMean(f)

        self.assertTrue(projected.meanFree)
        self.assertLess(abs(projected.mean), 1e-14)
        np.testing.assert_allclose(projected.values, self.sin.values, atol=1e-13)


class TestBiquadratic(unittest.TestCase):
    def test_resolventIdentity(self):
        grid = ow.makeGrid(30.0, 256)
        f = localizedField(grid, 1)

        for omega in (-5.0, -2.0, 0.0, 1.9):
            u = ow.resolventBiquadratic(f, omega)
            back = ow.applyBiquadratic(u, omega)
            self.assertLessEqual(ow.normL2(back - f) / ow.normL2(f), 1e-8)

    def test_resolventAgainstDenseSolve(self):
        grid = ow.makeGrid(20.0, 128)
        x = np.array(grid.nodes)
        bump = ow.Field(grid, np.exp(-x ** 2))
        omega = -1.0

        matrix = ow.differentiationMatrix(grid, 4) + omega * ow.differentiationMatrix(grid, 2) + np.eye(grid.n)
        dense = np.linalg.solve(matrix, bump.values)

        u = ow.resolventBiquadratic(bump, omega)
        self.assertLessEqual(np.linalg.norm(u.values - dense) / np.linalg.norm(dense), 1e-6)

    def test_resolventRange(self):
        grid = ow.makeGrid(10.0, 64)

        with self.assertRaises(ow.OmegaOutOfRangeError):
            ow.resolventBiquadratic(ow.Field.zeros(grid), 2.0)

        with self.assertRaises(ow.OmegaOutOfRangeError):
            ow.resolventBiquadratic(ow.Field.zeros(grid), 3.0)


class TestDecayRate(unittest.TestCase):
    def test_values(self):
        self.assertAlmostEqual(ow.decayRateKappa(0.0), np.sqrt(2.0) / 2.0, places=14)
        self.assertAlmostEqual(ow.decayRateKappa(-2.0), 1.0, places=14)
        self.assertAlmostEqual(ow.decayRateKappa(1.9), np.sqrt(0.1) / 2.0, places=14)

    def test_range(self):
        with self.assertRaises(ow.OmegaOutOfRangeError):
            ow.decayRateKappa(2.0)

    def test_unimodal(self):
        rising = [ow.decayRateKappa(w) for w in np.linspace(-10.0, -2.0, 50)]
        falling = [ow.decayRateKappa(w) for w in np.linspace(-2.0, 1.99, 50)]

        self.assertTrue(all(b > a for a, b in zip(rising, rising[1:])))
        self.assertTrue(all(b < a for a, b in zip(falling, falling[1:])))
        self.assertTrue(all(k > 0 for k in rising + falling))

    def test_matchesCharacteristicRoots(self):
        for omega in (-6.0, -2.5, -1.0, 0.5, 1.5):
            roots = np.roots([1.0, 0.0, omega, 0.0, 1.0])
            self.assertAlmostEqual(ow.decayRateKappa(omega), float(np.min(np.abs(roots.real))), places=10)


class TestNorms(unittest.TestCase):
    def setUp(self) -> None:
        self.grid = ow.makeGrid(np.pi, 64)
        self.sin = ow.Field.fromFunction(self.grid, np.sin, True)
        self.cos = ow.Field.fromFunction(self.grid, np.cos, True)

    def test_orthogonality(self):
        self.assertAlmostEqual(ow.inner(self.sin, self.cos), 0.0, places=12)
        self.assertAlmostEqual(ow.inner(self.sin, self.sin), np.pi, places=12)
        self.assertAlmostEqual(ow.normL2(self.sin), np.sqrt(np.pi), places=12)

    def test_sobolev(self):
        field = ow.Field.fromFunction(self.grid, lambda x: np.sin(3 * x), True)

        self.assertAlmostEqual(ow.normSobolev(field, 0), np.sqrt(np.pi), places=12)
        self.assertAlmostEqual(ow.normSobolev(field, 1), 3 * np.sqrt(np.pi), places=11)
        self.assertAlmostEqual(ow.normSobolev(field, -1), np.sqrt(np.pi) / 3, places=12)

    def test_parseval(self):
        grid = ow.makeGrid(15.0, 128)

        for seed in range(100):
            f = smoothField(grid, seed, meanFree=seed % 2 == 0)
            self.assertLessEqual(abs(ow.normL2(f) - ow.normSobolev(f, 0)) / ow.normL2(f), 1e-10)

    def test_boundaryAmplitude(self):
        grid = ow.makeGrid(20.0, 256)
        x = np.array(grid.nodes)
        bump = ow.Field(grid, np.exp(-x ** 2))

        self.assertLess(ow.boundaryAmplitudeRatio(bump), 1e-100)
        self.assertEqual(ow.boundaryAmplitudeRatio(ow.Field.zeros(grid)), 0.0)
        self.assertAlmostEqual(ow.boundaryAmplitudeRatio(ow.Field(grid, np.cos(np.pi * x / 20.0))), 1.0, places=12)


if __name__ == '__main__':
    unittest.main()
