import os
import unittest
import warnings
from functools import lru_cache

import numpy as np

from src import ostrovskywaves as ow


FULL_MATRIX = os.environ.get('OSTROVSKY_FULL_MATRIX') == '1'

REFERENCE_NODES = 512


@lru_cache(maxsize=None)
def referenceProfile(family: str = 'signed', p: float = 2.0, lam: float = 1.0,
                     n: int = REFERENCE_NODES) -> ow.WaveProfile:
    """Converged profile on the automatic box, solved once per process."""
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', ow.OstrovskyWarning)
        return ow.solveOnAutoGrid(ow.ModelFamily.fromName(family), p, lam, n)


def smoothField(grid: ow.Grid, seed: int, width: float = 3.0, meanFree: bool = True) -> ow.Field:
    """Random band-limited field with a Gaussian spectral envelope."""
    rng = np.random.default_rng(seed)
    size = grid.rwavenumbers.size
    coefficients = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * np.exp(-(grid.rwavenumbers / width) ** 2)
    coefficients[-1] = 0.0

    if meanFree:
        coefficients[0] = 0.0

    return ow.Field.fromSpectrum(grid, coefficients * grid.n / np.sqrt(grid.length), meanFree)


def localizedField(grid: ow.Grid, seed: int, amplitude: float = 1.0) -> ow.Field:
    """Random smooth mean-free bump, small near the box edges."""
    rng = np.random.default_rng(seed)
    x = np.array(grid.nodes)
    a, b, c = rng.uniform(0.5, 1.5, 3)
    values = amplitude * (a * np.cos(b * x) + c * x) * np.exp(-(x / 3.0) ** 2)
    return ow.projectZeroMean(ow.Field(grid, values))


class ProfileUnitTest(unittest.TestCase):
    family = 'signed'
    p = 2.0
    lam = 1.0

    @classmethod
    def setUpClass(cls) -> None:
        cls.profile = referenceProfile(cls.family, cls.p, cls.lam)

    def assertRelativeClose(self, actual: float, expected: float, tolerance: float, msg: str = '') -> None:
        scale = max(abs(expected), 1e-300)
        self.assertLessEqual(abs(actual - expected) / scale, tolerance,
                             msg or f'{actual!r} differs from {expected!r} by more than {tolerance:g} relative')
