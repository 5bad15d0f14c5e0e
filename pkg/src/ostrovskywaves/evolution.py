import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Callable, Tuple, List, Dict, Any

import numpy as np
from scipy import fft

from .exceptions import NonZeroMeanError, BlowupDetectedError, BadDeltaError, TimeStepTooLargeError, \
    InvalidOptionsError, BlowupWarning, DriftWarning
from .functionals import ModelFamily, WaveProfile, energySecondOrder
from .spectral import MEAN_TOLERANCE, FloatArray, ComplexArray, Field, Grid, normL2, derivativeSymbol


__all__ = [
    'EvolutionTrace',
    'PerturbationResult',
    'BLOWUP_GROWTH',
    'dealiasingMask',
    'linearSymbol',
    'stepBound',
    'integrate',
    'orbitalDistance',
    'travelingWaveError',
    'smoothNoise',
    'perturbationExperiment',
]


logger = logging.getLogger(__name__)


BLOWUP_GROWTH = 1e3
MASS_DRIFT_WARNING = 1e-9
ENERGY_DRIFT_WARNING = 1e-6
DEFAULT_SAMPLES = 1000

Observer = Callable[[float, Field], None]


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: FloatArray
    mass: FloatArray
    energy: FloatArray
    orbitalDistance: Optional[FloatArray]
    finalState: Field
    blowupTime: Optional[float] = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.times) <= 0):
            raise ValueError('Trace times must be strictly increasing')

        lengths = {len(self.times), len(self.mass), len(self.energy)}

        if self.orbitalDistance is not None:
            lengths.add(len(self.orbitalDistance))

        if len(lengths) != 1:
            raise ValueError('Trace series must have equal lengths')

    @property
    def massDrift(self) -> float:
        return float(np.max(np.abs(self.mass - self.mass[0])) / self.mass[0]) if self.mass[0] else 0.0

    @property
    def energyDrift(self) -> float:
        scale = abs(self.energy[0])
        return float(np.max(np.abs(self.energy - self.energy[0])) / scale) if scale else 0.0

    @property
    def maxOrbitalDistance(self) -> Optional[float]:
        return None if self.orbitalDistance is None else float(np.max(self.orbitalDistance))

    def toJson(self) -> Dict[str, Any]:
        return {
            'samples': int(len(self.times)),
            'final_time': float(self.times[-1]),
            'mass_drift': self.massDrift,
            'energy_drift': self.energyDrift,
            'max_orbital_distance': self.maxOrbitalDistance,
            'blowup_time': self.blowupTime,
        }


def dealiasingMask(grid: Grid) -> FloatArray:
    """2/3 rule on the half-complex spectrum."""
    k = np.arange(grid.n // 2 + 1)
    return np.asarray(k <= grid.n // 3, dtype=np.float64)


def linearSymbol(grid: Grid) -> ComplexArray:
    """Lambda(xi) = -i (xi^3 + 1/xi), zero on the mean mode."""
    return np.asarray(derivativeSymbol(grid, 3) + derivativeSymbol(grid, -1))


def stepBound(grid: Grid, p: float, amplitude: float, dt: float) -> float:
    """dt times the largest frequency of the dealiased nonlinear term; explicit stepping needs this below 1."""
    return float(dt * (2.0 / 3.0) * grid.nyquist * p * amplitude ** (p - 1.0))


class _Stepper:
    """Integrating-factor RK4: the linear flow is applied exactly, RK4 runs in the rotating frame."""

    def __init__(self, grid: Grid, family: ModelFamily, p: float, dt: float, nonlinear: bool) -> None:
        self.grid = grid
        self.family = family
        self.p = p
        self.nonlinear = nonlinear

        symbol = linearSymbol(grid)
        self.half = np.exp(0.5 * dt * symbol)
        self.full = self.half ** 2
        self.flux = dt * derivativeSymbol(grid, 1) * dealiasingMask(grid)

    def _g(self, v: ComplexArray) -> ComplexArray:
        if not self.nonlinear:
            return np.zeros_like(v)

        u = fft.irfft(v, n=self.grid.n)
        return np.asarray(self.flux * fft.rfft(self.family.nonlinearity(u, self.p)))

    def step(self, v: ComplexArray) -> ComplexArray:
        a = self._g(v)
        b = self._g(self.half * (v + 0.5 * a))
        c = self._g(self.half * v + 0.5 * b)
        d = self._g(self.full * v + self.half * c)

        result = self.full * v + (self.full * a + 2.0 * self.half * (b + c) + d) / 6.0
        result[0] = 0.0
        return np.asarray(result)


def _mass(u: Field) -> float:
    return 0.5 * normL2(u) ** 2


def integrate(u0: Field, family: ModelFamily, p: float, T: float, dt: float,
              reference: Optional[WaveProfile] = None, sampleEvery: Optional[int] = None, nonlinear: bool = True,
              observer: Optional[Observer] = None, raiseOnBlowup: bool = False) -> EvolutionTrace:
    """
    Advance u_t = u_xxx + d N(u) + d^-1 u from u0 over [0, T].

    :param u0: mean-free initial state
    :type u0: Field
    :param family: nonlinearity family
    :type family: ModelFamily
    :param p: exponent
    :type p: float
    :param T: final time
    :type T: float
    :param dt: step size, must divide T
    :type dt: float
    :param reference: when given, the orbital distance to this profile is sampled
    :type reference: Optional[WaveProfile]
    :param sampleEvery: steps between samples, defaults to about a thousand samples per run
    :type sampleEvery: Optional[int]
    :param nonlinear: disable to run the linear flow only
    :type nonlinear: bool
    :param observer: called with (t, u) at every sample
    :type observer: Optional[Callable[[float, Field], None]]
    :param raiseOnBlowup: raise BlowupDetectedError instead of returning the truncated trace
    :type raiseOnBlowup: bool
    :return: the sampled trace
    :rtype: EvolutionTrace
    """
    grid = u0.grid

    if not u0.meanFree and not u0.meanIsNegligible():
        raise NonZeroMeanError(u0.mean, MEAN_TOLERANCE * u0.maxAbs)

    if not (T > 0 and dt > 0):
        raise InvalidOptionsError(f'T and dt must be positive ({T}, {dt})')

    steps = int(round(T / dt))

    if steps < 1 or abs(steps * dt - T) > 1e-9 * T:
        raise InvalidOptionsError(f'dt = {dt} does not divide T = {T}')

    amplitude = u0.maxAbs

    if nonlinear:
        bound = stepBound(grid, p, amplitude, dt)

        if bound >= 1.0:
            raise TimeStepTooLargeError(dt, bound)

    if reference is not None:
        grid.checkSame(reference.grid)

    if sampleEvery is None:
        sampleEvery = max(1, steps // DEFAULT_SAMPLES)

    stepper = _Stepper(grid, family, p, dt, nonlinear)
    v = fft.rfft(u0.values)
    v[0] = 0.0

    times: List[float] = []
    mass: List[float] = []
    energy: List[float] = []
    distance: List[float] = []

    def sample(t: float, u: Field) -> None:
        times.append(t)
        mass.append(_mass(u))
        energy.append(energySecondOrder(u, family, p))

        if reference is not None:
            distance.append(orbitalDistance(u, reference.phi)[0])

        if observer is not None:
            observer(t, u)

    u = Field(grid, fft.irfft(v, n=grid.n), True)
    sample(0.0, u)
    blowupTime: Optional[float] = None

    for k in range(1, steps + 1):
        v = stepper.step(v)
        values = fft.irfft(v, n=grid.n)
        peak = float(np.max(np.abs(values))) if np.all(np.isfinite(values)) else np.inf

        if peak > BLOWUP_GROWTH * amplitude:
            blowupTime = k * dt
            warnings.warn(f'Amplitude exceeded {BLOWUP_GROWTH:g}x its initial value at t = {blowupTime}', BlowupWarning)
            break

        if k % sampleEvery == 0 or k == steps:
            u = Field(grid, values, True)
            sample(k * dt, u)

    trace = EvolutionTrace(
        np.asarray(times), np.asarray(mass), np.asarray(energy),
        np.asarray(distance) if reference is not None else None,
        u, blowupTime
    )

    logger.info('Integrated %s p=%g to t=%g: mass drift %.2e, energy drift %.2e%s', family.value, p, times[-1],
                trace.massDrift, trace.energyDrift, '' if blowupTime is None else f', blowup at {blowupTime}')

    if blowupTime is None and nonlinear and trace.energyDrift > ENERGY_DRIFT_WARNING:
        warnings.warn(f'Energy drift {trace.energyDrift:.3e}', DriftWarning)

    if blowupTime is None and trace.massDrift > MASS_DRIFT_WARNING:
        warnings.warn(f'Mass drift {trace.massDrift:.3e}', DriftWarning)

    if blowupTime is not None and raiseOnBlowup:
        raise BlowupDetectedError(blowupTime, BLOWUP_GROWTH, trace)

    return trace


def _correlation(coefficients: ComplexArray, grid: Grid, s: float, order: int) -> float:
    xi = grid.rwavenumbers
    weights = np.full(xi.shape, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    terms = weights * coefficients * (1j * xi) ** order * np.exp(1j * xi * s)
    return float(np.real(np.sum(terms)))


def orbitalDistance(u: Field, phi: Field) -> Tuple[float, float]:
    """min over s of ||u(. + s) - phi||, found from the cross-correlation peak and Newton refinement."""
    u.grid.checkSame(phi.grid)
    grid = u.grid

    coefficients = u.spectrum * np.conj(phi.spectrum)
    correlation = fft.irfft(coefficients, n=grid.n)
    j = int(np.argmax(correlation))
    s = float(j if j < grid.n // 2 else j - grid.n) * grid.spacing

    for _ in range(20):
        slope = _correlation(coefficients, grid, s, 1)
        bend = _correlation(coefficients, grid, s, 2)

        if bend >= 0:
            break

        step = slope / bend

        if abs(step) > grid.spacing:
            step = float(np.sign(step)) * grid.spacing

        s -= step

        if abs(step) < 1e-15 * grid.halfLength:
            break

    s = (s + grid.halfLength) % grid.length - grid.halfLength
    return normL2(u.shifted(-s) - phi), s


def travelingWaveError(profile: WaveProfile, T: float, dt: float,
                       sampleEvery: Optional[int] = None) -> Tuple[float, EvolutionTrace]:
    """sup_t ||u(t) - phi(. - omega t)|| / ||phi|| starting from the profile itself."""
    norm = normL2(profile.phi)
    errors: List[float] = []

    def observe(t: float, u: Field) -> None:
        errors.append(normL2(u - profile.phi.shifted(profile.omega * t)) / norm)

    trace = integrate(profile.phi, profile.family, profile.p, T, dt, profile, sampleEvery, observer=observe)
    return max(errors), trace


def smoothNoise(grid: Grid, seed: int, width: float = 2.0) -> Field:
    """Random mean-free field of unit L2 norm with a Gaussian spectral envelope of the given width."""
    rng = np.random.default_rng(seed)
    size = grid.rwavenumbers.size
    coefficients = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) * np.exp(-(grid.rwavenumbers / width) ** 2)
    coefficients[0] = 0.0
    coefficients[-1] = 0.0
    noise = Field.fromSpectrum(grid, coefficients, True)
    return noise / normL2(noise)


@dataclass(frozen=True, eq=False)
class PerturbationResult:
    ratio: float
    delta: float
    seed: int
    trace: EvolutionTrace
    travelingWaveOnly: bool = False

    def toJson(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            'ratio': self.ratio,
            'delta': self.delta,
            'seed': self.seed,
            'traveling_wave_only': self.travelingWaveOnly,
        }

        data.update(self.trace.toJson())
        return data


def perturbationExperiment(profile: WaveProfile, delta: float, T: float, dt: float, seed: int,
                           sampleEvery: Optional[int] = None) -> PerturbationResult:
    if not 0 <= delta <= 0.1:
        raise BadDeltaError(f'delta must lie in [0, 0.1] ({delta})')

    if delta == 0:
        logger.info('delta = 0, running the traveling-wave test instead')
        error, trace = travelingWaveError(profile, T, dt, sampleEvery)
        return PerturbationResult(error, 0.0, seed, trace, True)

    scale = delta * normL2(profile.phi)
    u0 = profile.phi + scale * smoothNoise(profile.grid, seed)

    trace = integrate(u0, profile.family, profile.p, T, dt, profile, sampleEvery)
    assert trace.orbitalDistance is not None

    ratio = float(np.max(trace.orbitalDistance)) / scale
    logger.info('Perturbation delta=%g seed=%d: stability ratio %.4g', delta, seed, ratio)

    return PerturbationResult(ratio, float(delta), seed, trace)
