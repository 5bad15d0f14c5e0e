from typing import Any, Optional


__all__ = [
    'OstrovskyError',
    'NonPowerOfTwoError',
    'NonPositiveLengthError',
    'GridMismatchError',
    'NonZeroMeanError',
    'NonFiniteValueError',
    'OmegaOutOfRangeError',
    'ExponentOutOfRangeError',
    'ConstraintViolatedError',
    'DegenerateProfileError',
    'NoSolitaryWavesError',
    'InvalidOptionsError',
    'BadEpsilonError',
    'BadAlphaError',
    'BadNError',
    'BadDeltaError',
    'InsufficientSamplesError',
    'NotConvergedError',
    'WindowTooNoisyError',
    'WindowTooSmallError',
    'KernelContaminationError',
    'TimeStepTooLargeError',
    'DimensionTooLargeError',
    'UsageError',
    'IncompatibleArtifactError',
    'NumericalFailure',
    'NoConvergenceError',
    'DivergedError',
    'EigenFailureError',
    'SolveFailureError',
    'BlowupDetectedError',
    'OstrovskyWarning',
    'ParityWarning',
    'KernelDimensionWarning',
    'BoundaryAmplitudeWarning',
    'BlowupWarning',
    'DriftWarning',
]


class OstrovskyError(Exception):
    ...


class NonPowerOfTwoError(OstrovskyError, ValueError):
    ...


class NonPositiveLengthError(OstrovskyError, ValueError):
    ...


class GridMismatchError(OstrovskyError, ValueError):
    ...


class NonZeroMeanError(OstrovskyError, ValueError):
    def __init__(self, mean: float, threshold: float) -> None:
        super().__init__(f'Field mean {mean:.3e} exceeds threshold {threshold:.3e}')
        self.mean = mean
        self.threshold = threshold


class NonFiniteValueError(OstrovskyError, ValueError):
    ...


class OmegaOutOfRangeError(OstrovskyError, ValueError):
    def __init__(self, omega: float) -> None:
        super().__init__(f'omega = {omega} must satisfy omega < 2')
        self.omega = omega


class ExponentOutOfRangeError(OstrovskyError, ValueError):
    def __init__(self, family: str, p: float, low: float, high: float) -> None:
        super().__init__(f'p = {p} is outside the admissible range {low:g} < p < {high:g} of the {family} family')
        self.family = family
        self.p = p
        self.low = low
        self.high = high


class ConstraintViolatedError(OstrovskyError, ValueError):
    def __init__(self, normSquared: float, lam: float) -> None:
        super().__init__(f'||u||^2 = {normSquared!r} does not match lambda = {lam!r}')
        self.normSquared = normSquared
        self.lam = lam


class DegenerateProfileError(OstrovskyError, ValueError):
    ...


class NoSolitaryWavesError(OstrovskyError, ValueError):
    ...


class InvalidOptionsError(OstrovskyError, ValueError):
    ...


class BadEpsilonError(OstrovskyError, ValueError):
    ...


class BadAlphaError(OstrovskyError, ValueError):
    ...


class BadNError(OstrovskyError, ValueError):
    ...


class BadDeltaError(OstrovskyError, ValueError):
    ...


class InsufficientSamplesError(OstrovskyError, ValueError):
    ...


class NotConvergedError(OstrovskyError, ValueError):
    def __init__(self, residual: float, threshold: float) -> None:
        super().__init__(f'Profile residual {residual:.3e} exceeds {threshold:.1e}, not a converged wave')
        self.residual = residual
        self.threshold = threshold


class WindowTooNoisyError(OstrovskyError):
    ...


class WindowTooSmallError(OstrovskyError):
    ...


class KernelContaminationError(OstrovskyError):
    def __init__(self, overlap: float, threshold: float) -> None:
        super().__init__(f'Kernel overlap {overlap:.3e} exceeds {threshold:.1e}')
        self.overlap = overlap
        self.threshold = threshold


class TimeStepTooLargeError(OstrovskyError, ValueError):
    def __init__(self, dt: float, bound: float) -> None:
        super().__init__(f'dt = {dt} violates the explicit stepping bound (dt * nonlinear frequency = {bound:.3f} >= 1)')
        self.dt = dt
        self.bound = bound


class DimensionTooLargeError(OstrovskyError, ValueError):
    ...


class UsageError(OstrovskyError):
    ...


class IncompatibleArtifactError(OstrovskyError):
    ...


class NumericalFailure(OstrovskyError):
    ...


class NoConvergenceError(NumericalFailure):
    def __init__(self, iterations: int, residual: float, reason: str = 'residual stagnated') -> None:
        super().__init__(f'{reason} after {iterations} iterations (residual {residual:.3e})')
        self.iterations = iterations
        self.residual = residual


class DivergedError(NumericalFailure):
    def __init__(self, iterations: int, reason: str) -> None:
        super().__init__(f'Iteration diverged at step {iterations}: {reason}')
        self.iterations = iterations


class EigenFailureError(NumericalFailure):
    ...


class SolveFailureError(NumericalFailure):
    ...


class BlowupDetectedError(NumericalFailure):
    def __init__(self, time: float, growth: float, trace: Optional[Any] = None) -> None:
        super().__init__(f'Amplitude grew by {growth:.3e} at t = {time}')
        self.time = time
        self.growth = growth
        self.trace = trace


class OstrovskyWarning(RuntimeWarning):
    ...


class ParityWarning(OstrovskyWarning):
    ...


class KernelDimensionWarning(OstrovskyWarning):
    ...


class BoundaryAmplitudeWarning(OstrovskyWarning):
    ...


class BlowupWarning(OstrovskyWarning):
    ...


class DriftWarning(OstrovskyWarning):
    ...
