from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Union, Optional, Any

import numpy as np
import numpy.typing as npt
from scipy import fft

from .exceptions import NonPowerOfTwoError, NonPositiveLengthError, GridMismatchError, NonZeroMeanError, \
    NonFiniteValueError, OmegaOutOfRangeError
from .helper import isPowerOfTwo


__all__ = [
    'FloatArray',
    'ComplexArray',
    'MEAN_TOLERANCE',
    'MIN_NODES',
    'Grid',
    'Field',
    'makeGrid',
    'projectZeroMean',
    'deriv',
    'derivativeSymbol',
    'differentiationMatrix',
    'resolventBiquadratic',
    'applyBiquadratic',
    'decayRateKappa',
    'inner',
    'normL2',
    'normSobolev',
    'boundaryAmplitudeRatio',
    'evaluateAt',
]


FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

MEAN_TOLERANCE = 1e-12
MIN_NODES = 64


@dataclass(frozen=True)
class Grid:
    """Periodic box [-L, L) with n equispaced collocation nodes."""
    halfLength: float
    n: int

    def __post_init__(self) -> None:
        if not self.halfLength > 0 or not np.isfinite(self.halfLength):
            raise NonPositiveLengthError(f'Half length must be positive and finite ({self.halfLength})')

        if int(self.n) != self.n or not isPowerOfTwo(int(self.n)) or self.n < MIN_NODES:
            raise NonPowerOfTwoError(f'Node count must be a power of two >= {MIN_NODES} ({self.n})')

    @property
    def length(self) -> float:
        return 2.0 * self.halfLength

    @property
    def spacing(self) -> float:
        return self.length / self.n

    @cached_property
    def nodes(self) -> FloatArray:
        nodes = -self.halfLength + np.arange(self.n) * self.spacing
        nodes.flags.writeable = False
        return nodes

    @cached_property
    def wavenumbers(self) -> FloatArray:
        """All n wavenumbers pi k / L in FFT order, k in [-n/2, n/2)."""
        xi = 2.0 * np.pi * fft.fftfreq(self.n, d=self.spacing)
        xi.flags.writeable = False
        return xi

    @cached_property
    def rwavenumbers(self) -> FloatArray:
        """The n/2 + 1 nonnegative wavenumbers of the half-complex spectrum, Nyquist last."""
        xi = 2.0 * np.pi * fft.rfftfreq(self.n, d=self.spacing)
        xi.flags.writeable = False
        return xi

    @property
    def nyquist(self) -> float:
        return float(np.pi * self.n / self.length)

    def checkSame(self, other: 'Grid') -> None:
        if self != other:
            raise GridMismatchError(f'Grids differ: {self} vs {other}')


def makeGrid(halfLength: float, n: int) -> Grid:
    return Grid(float(halfLength), int(n) if int(n) == n else n)


class Field:
    """
    A real function sampled on a Grid. Values are immutable; every operation returns a new Field.
    """

    def __init__(self, grid: Grid, values: Union[FloatArray, Any], meanFree: bool = False) -> None:
        array = np.array(values, dtype=np.float64)

        if array.shape != (grid.n,):
            raise GridMismatchError(f'Expected {grid.n} values, got shape {array.shape}')

        if not np.all(np.isfinite(array)):
            raise NonFiniteValueError('Field values must all be finite')

        if meanFree:
            mean = float(np.mean(array))
            threshold = MEAN_TOLERANCE * float(np.max(np.abs(array)))

            if abs(mean) > threshold:
                raise NonZeroMeanError(mean, threshold)

        array.flags.writeable = False

        self.grid = grid
        self.values: FloatArray = array
        self.meanFree = meanFree

    @classmethod
    def fromFunction(cls, grid: Grid, func: Callable[[FloatArray], Any], meanFree: bool = False) -> 'Field':
        return cls(grid, func(np.array(grid.nodes)), meanFree)

    @classmethod
    def fromSpectrum(cls, grid: Grid, spectrum: ComplexArray, meanFree: bool = False) -> 'Field':
        return cls(grid, fft.irfft(spectrum, n=grid.n), meanFree)

    @classmethod
    def zeros(cls, grid: Grid) -> 'Field':
        return cls(grid, np.zeros(grid.n), True)

    @property
    def spectrum(self) -> ComplexArray:
        return fft.rfft(self.values)

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def maxAbs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def isZero(self) -> bool:
        return not np.any(self.values)

    def meanIsNegligible(self) -> bool:
        return abs(self.mean) <= MEAN_TOLERANCE * self.maxAbs

    def shifted(self, s: float) -> 'Field':
        """Spectral translation, returns f(x - s)."""
        coefficients = self.spectrum * np.exp(-1j * self.grid.rwavenumbers * s)
        return Field.fromSpectrum(self.grid, coefficients, self.meanFree)

    def reflected(self) -> 'Field':
        """Returns f(-x) on the grid; node j maps to node (n - j) mod n."""
        index = (self.grid.n - np.arange(self.grid.n)) % self.grid.n
        return Field(self.grid, self.values[index], self.meanFree)

    def withValues(self, values: FloatArray, meanFree: Optional[bool] = None) -> 'Field':
        return Field(self.grid, values, self.meanFree if meanFree is None else meanFree)

    def __add__(self, other: 'Field') -> 'Field':
        self.grid.checkSame(other.grid)
        return Field(self.grid, self.values + other.values, self.meanFree and other.meanFree)

    def __sub__(self, other: 'Field') -> 'Field':
        self.grid.checkSame(other.grid)
        return Field(self.grid, self.values - other.values, self.meanFree and other.meanFree)

    def __mul__(self, scalar: float) -> 'Field':
        return Field(self.grid, self.values * float(scalar), self.meanFree)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> 'Field':
        return Field(self.grid, self.values / float(scalar), self.meanFree)

    def __neg__(self) -> 'Field':
        return Field(self.grid, -self.values, self.meanFree)

    def __repr__(self) -> str:
        return f'Field(L={self.grid.halfLength}, n={self.grid.n}, max={self.maxAbs:.6g}, meanFree={self.meanFree})'


def projectZeroMean(f: Field) -> Field:
    coefficients = f.spectrum
    coefficients[0] = 0.0
    return Field.fromSpectrum(f.grid, coefficients, True)


def derivativeSymbol(grid: Grid, order: int) -> ComplexArray:
    """Half-complex symbol of the order-th derivative; zero mode maps to 0 for order != 0, Nyquist dropped for odd orders."""
    xi = grid.rwavenumbers
    symbol = np.zeros(xi.shape, dtype=np.complex128)

    if order == 0:
        symbol[:] = 1.0
        return symbol

    nonzero = xi != 0.0
    symbol[nonzero] = (1j * xi[nonzero]) ** order

    if order % 2 != 0:
        symbol[-1] = 0.0

    return symbol


def _requireMeanFree(f: Field) -> None:
    if not f.meanFree and not f.meanIsNegligible():
        raise NonZeroMeanError(f.mean, MEAN_TOLERANCE * f.maxAbs)


def deriv(f: Field, order: int) -> Field:
    """Spectral derivative of signed order; odd orders drop the Nyquist mode, so deriv(deriv(f, 1), -1) loses it."""
    if order < 0:
        _requireMeanFree(f)

    if order == 0:
        return f

    return Field.fromSpectrum(f.grid, f.spectrum * derivativeSymbol(f.grid, order), True)


def differentiationMatrix(grid: Grid, order: int) -> FloatArray:
    """Dense collocation matrix D with D @ f.values == deriv(f, order).values."""
    identity = np.eye(grid.n)
    symbol = derivativeSymbol(grid, order)[:, np.newaxis]
    return np.asarray(fft.irfft(symbol * fft.rfft(identity, axis=0), n=grid.n, axis=0), dtype=np.float64)


def _biquadraticSymbol(grid: Grid, omega: float) -> FloatArray:
    xi2 = grid.rwavenumbers ** 2
    return np.asarray(xi2 * xi2 - omega * xi2 + 1.0, dtype=np.float64)


def resolventBiquadratic(f: Field, omega: float) -> Field:
    """Inverse of d^4 + omega d^2 + 1, bounded for omega < 2."""
    if not omega < 2.0:
        raise OmegaOutOfRangeError(omega)

    return Field.fromSpectrum(f.grid, f.spectrum / _biquadraticSymbol(f.grid, omega), f.meanFree)


def applyBiquadratic(f: Field, omega: float) -> Field:
    return Field.fromSpectrum(f.grid, f.spectrum * _biquadraticSymbol(f.grid, omega), f.meanFree)


def decayRateKappa(omega: float) -> float:
    if not omega < 2.0:
        raise OmegaOutOfRangeError(omega)

    if omega >= -2.0:
        return float(np.sqrt(2.0 - omega) / 2.0)

    return float(np.sqrt((-omega - np.sqrt(omega * omega - 4.0)) / 2.0))


def inner(f: Field, g: Field) -> float:
    f.grid.checkSame(g.grid)
    return float(f.grid.spacing * np.dot(f.values, g.values))


def normL2(f: Field) -> float:
    return float(np.sqrt(inner(f, f)))


def normSobolev(f: Field, s: float) -> float:
    """Homogeneous Sobolev norm (integral of |xi|^(2s) |f^|^2)^(1/2), evaluated by Parseval."""
    if s < 0:
        _requireMeanFree(f)

    grid = f.grid
    xi = grid.rwavenumbers
    power = np.abs(f.spectrum) ** 2

    weights = np.full(xi.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0

    multiplier = np.zeros(xi.shape)
    nonzero = xi != 0.0
    multiplier[nonzero] = xi[nonzero] ** (2.0 * s)

    if s == 0:
        multiplier[0] = 1.0

    total = np.sum(weights * multiplier * power)
    return float(np.sqrt(grid.length * total) / grid.n)


def boundaryAmplitudeRatio(f: Field, fraction: float = 0.9) -> float:
    peak = f.maxAbs

    if peak == 0.0:
        return 0.0

    outer = np.abs(f.grid.nodes) >= fraction * f.grid.halfLength
    return float(np.max(np.abs(f.values[outer])) / peak)


def evaluateAt(f: Field, x: float, order: int = 0) -> float:
    """Evaluate the order-th derivative of the trigonometric interpolant of f at an arbitrary point."""
    grid = f.grid
    coefficients = f.spectrum * derivativeSymbol(grid, order)
    phases = np.exp(1j * grid.rwavenumbers * (x + grid.halfLength))

    weights = np.full(coefficients.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0

    return float(np.real(np.sum(weights * coefficients * phases)) / grid.n)
