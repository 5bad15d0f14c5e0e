import logging
from dataclasses import dataclass, asdict
from typing import TYPE_CHECKING, Optional, Callable, Dict, Any, Tuple

import numpy as np

from .exceptions import NotConvergedError, WindowTooSmallError, WindowTooNoisyError, BadNError, BadEpsilonError
from .functionals import ModelFamily, WaveProfile
from .helper import relativeDifference
from .spectral import FloatArray, Field, deriv, normL2, decayRateKappa

if TYPE_CHECKING:
    from .stability import SpectrumReport
    from .evolution import PerturbationResult


__all__ = [
    'CONVERGED_RESIDUAL',
    'checkConverged',
    'PohozaevReport',
    'DecayFit',
    'SamplingReport',
    'VerificationRow',
    'pohozaevResiduals',
    'pohozaevFourthOrder',
    'fitDecayRate',
    'fitDecay',
    'samplingCheck',
    'verificationRow',
]


logger = logging.getLogger(__name__)


CONVERGED_RESIDUAL = 1e-6
DERIVATIVE_FORM_NOTE = (
    'abs family: r1/r2 use the |phi|^p nonlinearity of the Euler-Lagrange equation; '
    'r1Derivative/r2Derivative use the d/dx(|phi|^p) form, whose nonlinear pairings with phi vanish'
)
SIGNED_NOTE = 'signed family: |phi|^(p-1) phi nonlinearity'


@dataclass(frozen=True)
class PohozaevReport:
    r1: float
    r2: float
    variantNote: str
    order: int = 2
    r1Derivative: Optional[float] = None
    r2Derivative: Optional[float] = None

    def __post_init__(self) -> None:
        for value in (self.r1, self.r2):
            if not (np.isfinite(value) and value >= 0):
                raise ValueError(f'Pohozaev residuals must be finite and nonnegative ({value})')

    @property
    def worst(self) -> float:
        return max(self.r1, self.r2)

    def toJson(self) -> Dict[str, Any]:
        return asdict(self)


def checkConverged(profile: WaveProfile) -> None:
    if profile.phi.isZero:
        raise NotConvergedError(float('inf'), CONVERGED_RESIDUAL)

    if not profile.elResidual <= CONVERGED_RESIDUAL:
        raise NotConvergedError(profile.elResidual, CONVERGED_RESIDUAL)


def _identityResiduals(gradientTerm: float, inverseTerm: float, pairing: float, omegaMass: float,
                       p: float) -> Tuple[float, float]:
    r1 = relativeDifference(gradientTerm, inverseTerm + (p - 1.0) / (2.0 * (p + 1.0)) * pairing)
    r2 = relativeDifference(omegaMass, 2.0 * inverseTerm - (p + 3.0) / (2.0 * (p + 1.0)) * pairing)
    return r1, r2


def pohozaevResiduals(profile: WaveProfile) -> PohozaevReport:
    """
    Relative residuals of the two integral identities of the second-order equation.

    Pairing -phi'' - d^-2 phi - N(phi) = omega phi with phi gives omega lam = G + I - P, and the mass-preserving
    dilation phi_s = s^(-1/2) phi(x / s) gives G = I + (p - 1) / (2 (p + 1)) P, where G = ||phi'||^2,
    I = ||d^-1 phi||^2 and P = int N(phi) phi.

    For the abs family the derivative-form nonlinearity d/dx(|phi|^p) pairs to zero with phi, so its solutions
    satisfy omega lam = G + I exactly. r1Derivative substitutes P = 0 into the dilation identity as well; that
    step also needs int x |phi|^(p-2) phi phi'^2 = 0, so it is a comparison between the two forms rather than an
    identity. On a profile of the |phi|^p equation both derivative-form residuals stay of order P / (G + I).
    """
    checkConverged(profile)

    phi = profile.phi
    gradientTerm = normL2(deriv(phi, 1)) ** 2
    inverseTerm = normL2(deriv(phi, -1)) ** 2
    pairing = profile.family.nonlinearPairing(phi, profile.p)
    omegaMass = profile.omega * normL2(phi) ** 2

    r1, r2 = _identityResiduals(gradientTerm, inverseTerm, pairing, omegaMass, profile.p)

    if profile.family is ModelFamily.AbsPower:
        return PohozaevReport(
            r1, r2, DERIVATIVE_FORM_NOTE, 2,
            relativeDifference(gradientTerm, inverseTerm),
            relativeDifference(omegaMass, gradientTerm + inverseTerm),
        )

    return PohozaevReport(r1, r2, SIGNED_NOTE, 2)


def pohozaevFourthOrder(profile: WaveProfile) -> PohozaevReport:
    checkConverged(profile)

    wave = deriv(profile.phi, -1)
    slope = deriv(wave, 1)

    curvatureTerm = normL2(deriv(wave, 2)) ** 2
    massTerm = normL2(wave) ** 2
    pairing = profile.family.nonlinearPairing(slope, profile.p)
    omegaMass = profile.omega * normL2(slope) ** 2

    r1, r2 = _identityResiduals(curvatureTerm, massTerm, pairing, omegaMass, profile.p)
    note = DERIVATIVE_FORM_NOTE if profile.family is ModelFamily.AbsPower else SIGNED_NOTE

    return PohozaevReport(r1, r2, f'fourth order, {note}', 4)


@dataclass(frozen=True)
class DecayFit:
    kappaLeft: float
    kappaRight: float
    kappaReference: float
    windowStart: float
    windowEnd: float

    @property
    def kappaFit(self) -> float:
        return 0.5 * (self.kappaLeft + self.kappaRight)

    @property
    def ratio(self) -> float:
        return self.kappaFit / self.kappaReference

    @property
    def deviation(self) -> float:
        return abs(self.ratio - 1.0)

    def withinTolerance(self, tolerance: float = 0.1) -> bool:
        return all(abs(k / self.kappaReference - 1.0) <= tolerance for k in (self.kappaLeft, self.kappaRight))

    def toJson(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(kappaFit=self.kappaFit, ratio=self.ratio, deviation=self.deviation)
        return data


MIN_WINDOW_NODES = 8


def _tailRate(samples: FloatArray, spacing: float, stride: int) -> float:
    """
    Fit y[j + 2s] = a y[j + s] + b y[j] by least squares and return the decay rate of the dominant root.
    Exact for single exponentials, damped oscillations and double roots alike.
    """
    count = samples.size - 2 * stride
    design = np.column_stack((samples[stride:stride + count], samples[:count]))
    target = samples[2 * stride:2 * stride + count]

    (a, b), *_ = np.linalg.lstsq(design, target, rcond=None)
    roots = np.roots([1.0, -a, -b])
    dominant = float(np.max(np.abs(roots)))

    if not 0 < dominant < 1:
        raise WindowTooNoisyError(f'No decaying mode in the fit window (dominant root modulus {dominant:.6g})')

    return float(-np.log(dominant) / (stride * spacing))


def fitDecayRate(field: Field, kappaReference: float, center: Optional[float] = None) -> DecayFit:
    grid = field.grid

    if grid.halfLength * kappaReference < 4.0:
        raise WindowTooSmallError(f'L kappa = {grid.halfLength * kappaReference:.3f} < 4')

    values = field.values
    nodes = np.asarray(grid.nodes)

    if center is None:
        center = float(nodes[int(np.argmax(np.abs(values)))])

    start = 3.0 / kappaReference
    end = min(0.8 * grid.halfLength, 10.0 / kappaReference)

    right = (nodes - center >= start) & (nodes - center <= end)
    left = (center - nodes >= start) & (center - nodes <= end)

    if min(np.count_nonzero(right), np.count_nonzero(left)) < MIN_WINDOW_NODES:
        raise WindowTooSmallError(f'Fit window [{start:.3g}, {end:.3g}] holds fewer than {MIN_WINDOW_NODES} nodes')

    floor = grid.n * np.finfo(float).eps * field.maxAbs
    tails = (values[right], values[left][::-1])

    for tail in tails:
        farHalf = tail[tail.size // 2:]

        if np.max(np.abs(farHalf)) < 10.0 * floor:
            raise WindowTooNoisyError(f'Tail amplitude {np.max(np.abs(farHalf)):.3e} below 10x noise floor {floor:.3e}')

    stride = max(1, int(round(0.5 / (kappaReference * grid.spacing))))
    stride = min(stride, max(1, (min(t.size for t in tails) - 3) // 2))

    kappaRight, kappaLeft = (_tailRate(tail, grid.spacing, stride) for tail in tails)

    fit = DecayFit(kappaLeft, kappaRight, kappaReference, start, end)
    logger.info('Decay fit: left %.6g right %.6g reference %.6g (ratio %.4f)',
                kappaLeft, kappaRight, kappaReference, fit.ratio)
    return fit


def fitDecay(profile: WaveProfile) -> DecayFit:
    return fitDecayRate(profile.phi, decayRateKappa(profile.omega), 0.0)


@dataclass(frozen=True)
class SamplingReport:
    lhs: float
    rhsBound: float
    sampled: float
    fraction: float
    epsilon: float
    N: int

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhsBound * (1.0 + 1e-6)

    def toJson(self) -> Dict[str, Any]:
        data = asdict(self)
        data['passed'] = self.passed
        return data


RealFunction = Callable[[FloatArray], FloatArray]


def _centralDifference(func: RealFunction) -> RealFunction:
    def slope(x: FloatArray) -> FloatArray:
        h = 1e-5 * np.maximum(1.0, np.abs(x))
        return np.asarray((func(x + h) - func(x - h)) / (2.0 * h))
    return slope


VARIATION_CELL = 0.01


def _gaussLegendre(func: RealFunction, starts: FloatArray, widths: FloatArray, order: int) -> FloatArray:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    points = starts[:, np.newaxis] + 0.5 * widths[:, np.newaxis] * (nodes[np.newaxis, :] + 1.0)
    values = np.asarray(func(points.ravel())).reshape(points.shape)
    return np.asarray(0.5 * widths * (values @ weights), dtype=np.float64)


def samplingCheck(func: RealFunction, epsilon: float, N: int, derivative: Optional[RealFunction] = None,
                  halfWidth: float = 12.0, order: int = 16) -> SamplingReport:
    """
    Compare the periodic partial sampling sum_n int_{n eps}^{n eps + eps/N} f with (1/N) int f, bounded by
    (eps/N) int |f'|. All integrals use composite Gauss-Legendre quadrature over [-halfWidth, halfWidth].
    """
    if isinstance(N, bool) or int(N) != N or N < 2:
        raise BadNError(f'N must be an integer >= 2 ({N})')

    if not (np.isfinite(epsilon) and epsilon > 0):
        raise BadEpsilonError(f'epsilon must be positive ({epsilon})')

    N = int(N)

    slope = derivative if derivative is not None else _centralDifference(func)

    first = int(np.floor(-halfWidth / epsilon))
    last = int(np.ceil(halfWidth / epsilon))
    starts = epsilon * np.arange(first, last, dtype=np.float64)

    sampledParts = _gaussLegendre(func, starts, np.full(starts.shape, epsilon / N), order)
    restParts = _gaussLegendre(func, starts + epsilon / N, np.full(starts.shape, epsilon - epsilon / N), order)

    sampled = float(np.sum(sampledParts))
    total = sampled + float(np.sum(restParts))

    cells = max(1, int(np.ceil((starts[-1] + epsilon - starts[0]) / VARIATION_CELL)))
    width = (starts[-1] + epsilon - starts[0]) / cells
    variationStarts = starts[0] + width * np.arange(cells, dtype=np.float64)
    variation = float(np.sum(_gaussLegendre(lambda x: np.abs(slope(x)), variationStarts,
                                            np.full(variationStarts.shape, width), order)))

    return SamplingReport(abs(sampled - total / N), epsilon / N * variation, sampled, total / N, float(epsilon), N)


@dataclass(frozen=True)
class VerificationRow:
    """One row of the verification table; every cell is copied from a module report."""
    family: str
    p: float
    lam: float
    omega: float
    mValue: float
    elResidual2: float
    elResidual4: float
    pohozaevR1: float
    pohozaevR2: float
    pohozaevR1Fourth: float
    pohozaevR2Fourth: float
    kappaRatio: float
    nMinus: int
    kernelOverlap: float
    vkValue: Optional[float]
    maxRealFull: float
    verdict: str
    evolveRatio: Optional[float]

    def toJson(self) -> Dict[str, Any]:
        return asdict(self)


def verificationRow(profile: WaveProfile, mValue: float, elResidual4: float, pohozaev: PohozaevReport,
                    pohozaev4: PohozaevReport, decay: DecayFit, spectrum: 'SpectrumReport',
                    perturbation: Optional['PerturbationResult'] = None) -> VerificationRow:
    return VerificationRow(
        family=profile.family.value,
        p=profile.p,
        lam=profile.lam,
        omega=profile.omega,
        mValue=mValue,
        elResidual2=profile.elResidual,
        elResidual4=elResidual4,
        pohozaevR1=pohozaev.r1,
        pohozaevR2=pohozaev.r2,
        pohozaevR1Fourth=pohozaev4.r1,
        pohozaevR2Fourth=pohozaev4.r2,
        kappaRatio=decay.ratio,
        nMinus=spectrum.nMinus,
        kernelOverlap=spectrum.kernelOverlap,
        vkValue=spectrum.vkValue,
        maxRealFull=spectrum.maxRealFull,
        verdict=spectrum.verdict.value,
        evolveRatio=None if perturbation is None else perturbation.ratio,
    )
