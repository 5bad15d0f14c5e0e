import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple, List, Dict, Any

import numpy as np
import scipy.linalg

from .diagnostics import checkConverged
from .exceptions import EigenFailureError, SolveFailureError, KernelContaminationError, \
    DimensionTooLargeError, InvalidOptionsError, KernelDimensionWarning
from .functionals import ModelFamily, WaveProfile
from .solver import SolverOptions, minimize
from .spectral import FloatArray, ComplexArray, Field, Grid, makeGrid, deriv, differentiationMatrix, normL2, inner, \
    projectZeroMean


__all__ = [
    'StabilityVerdict',
    'StabilityOptions',
    'OperatorMatrix',
    'SymmetricSpectrum',
    'FullSpectrum',
    'SpectrumReport',
    'FourthOrderOperatorReport',
    'GridConvergenceReport',
    'meanFreeBasis',
    'assembleOperator',
    'assembleLplus',
    'applyLplus',
    'symmetricSpectrum',
    'weakNondegeneracyCheck',
    'solveOnComplement',
    'vkQuantity',
    'fullLinearizationSpectrum',
    'participationRatio',
    'spectrumSymmetryDefect',
    'classify',
    'analyzeStability',
    'verdict',
    'assembleFourthOrderOperator',
    'fourthOrderOperatorCheck',
    'gridConvergence',
]


logger = logging.getLogger(__name__)


class StabilityVerdict(Enum):
    Stable = 'Stable'
    Inconclusive = 'Inconclusive'
    Unstable = 'Unstable'


@dataclass(frozen=True)
class StabilityOptions:
    kernelRelTol: float = 1e-6
    overlapTol: float = 1e-4
    vkRelTol: float = 1e-8
    realPartRelTol: float = 1e-6
    eigenResidualTol: float = 1e-6
    localizationThreshold: float = 0.5
    maxFullDimension: int = 4096

    def __post_init__(self) -> None:
        for name in ('kernelRelTol', 'overlapTol', 'vkRelTol', 'realPartRelTol', 'eigenResidualTol'):
            if not getattr(self, name) > 0:
                raise InvalidOptionsError(f'{name} must be positive')

        if not 0 < self.localizationThreshold <= 1:
            raise InvalidOptionsError(f'localizationThreshold must lie in (0, 1] ({self.localizationThreshold})')


def meanFreeBasis(n: int) -> FloatArray:
    """Orthonormal n x (n - 1) basis of the vectors with zero sum, from the Householder reflection swapping e1 and 1/sqrt(n)."""
    w = np.full(n, 1.0 / np.sqrt(n))
    w[0] -= 1.0
    reflection = np.eye(n) - 2.0 * np.outer(w, w) / np.dot(w, w)
    return np.ascontiguousarray(reflection[:, 1:])


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """
    Dense collocation matrix of -d^2 - d^-2 - omega - V, sandwiched between mean projections.
    """
    grid: Grid
    omega: float
    potential: Field
    entries: FloatArray

    @property
    def dimension(self) -> int:
        return self.grid.n

    @cached_property
    def basis(self) -> FloatArray:
        return meanFreeBasis(self.grid.n)

    @cached_property
    def reduced(self) -> FloatArray:
        return np.asarray(self.basis.T @ self.entries @ self.basis)

    def apply(self, f: Field) -> Field:
        self.grid.checkSame(f.grid)
        return Field(self.grid, self.entries @ f.values)

    @property
    def symmetryDefect(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.T)) / np.linalg.norm(self.entries, 2))


def assembleOperator(grid: Grid, omega: float, potential: Optional[Field] = None) -> OperatorMatrix:
    if potential is None:
        potential = Field(grid, np.zeros(grid.n))

    grid.checkSame(potential.grid)

    full = -differentiationMatrix(grid, 2) - differentiationMatrix(grid, -2)
    full -= np.diag(omega + potential.values)

    projector = np.eye(grid.n) - 1.0 / grid.n
    entries = projector @ full @ projector
    entries = 0.5 * (entries + entries.T)

    return OperatorMatrix(grid, float(omega), potential, np.asarray(entries))


def _potential(profile: WaveProfile) -> Field:
    return Field(profile.grid, profile.family.linearizedPotential(profile.phi.values, profile.p))


def assembleLplus(profile: WaveProfile) -> OperatorMatrix:
    checkConverged(profile)
    return assembleOperator(profile.grid, profile.omega, _potential(profile))


def applyLplus(profile: WaveProfile, f: Field) -> Field:
    """Spectral application of P(-d^2 - d^-2 - omega - V) to a mean-free field."""
    potential = profile.family.linearizedPotential(profile.phi.values, profile.p)
    local = Field(f.grid, -profile.omega * f.values - potential * f.values)
    return Field(f.grid, -deriv(f, 2).values - deriv(f, -2).values + projectZeroMean(local).values, True)


@dataclass(frozen=True, eq=False)
class SymmetricSpectrum:
    eigenvalues: FloatArray
    eigenvectors: FloatArray
    theta: float

    @property
    def nMinus(self) -> int:
        return int(np.count_nonzero(self.eigenvalues < -self.theta))

    @property
    def kernelDim(self) -> int:
        return int(np.count_nonzero(np.abs(self.eigenvalues) <= self.theta))

    @property
    def positiveCount(self) -> int:
        return int(np.count_nonzero(self.eigenvalues > self.theta))

    @property
    def kernelVectors(self) -> FloatArray:
        return np.asarray(self.eigenvectors[:, np.abs(self.eigenvalues) <= self.theta])


def symmetricSpectrum(operator: OperatorMatrix, theta: Optional[float] = None,
                      kernelRelTol: float = 1e-6) -> SymmetricSpectrum:
    """Eigendecomposition on the mean-free subspace; eigenvectors are lifted back to collocation values."""
    try:
        values, vectors = scipy.linalg.eigh(operator.reduced)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailureError(f'Symmetric eigensolver failed: {e}') from e

    if theta is None:
        theta = kernelRelTol * float(np.max(np.abs(values)))

    return SymmetricSpectrum(np.asarray(values), np.asarray(operator.basis @ vectors), float(theta))


def weakNondegeneracyCheck(profile: WaveProfile, spectrum: SymmetricSpectrum) -> float:
    kernel = spectrum.kernelVectors

    if kernel.shape[1] == 0:
        return 0.0

    phi = profile.phi.values
    overlaps = np.abs(kernel.T @ phi) / (np.linalg.norm(kernel, axis=0) * np.linalg.norm(phi))
    return float(np.max(overlaps))


def _complementSolve(values: FloatArray, vectors: FloatArray, rhs: FloatArray, theta: float) -> FloatArray:
    keep = np.abs(values) > theta
    coefficients = vectors[:, keep].T @ rhs / values[keep]
    solution = np.asarray(vectors[:, keep] @ coefficients)

    if not np.all(np.isfinite(solution)):
        raise SolveFailureError('Complement solve produced non-finite values')

    return solution


def solveOnComplement(matrix: FloatArray, rhs: FloatArray, theta: float = 0.0) -> FloatArray:
    """Solve a symmetric system restricted to the span of eigenvectors with |eigenvalue| > theta."""
    try:
        values, vectors = scipy.linalg.eigh(matrix)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SolveFailureError(f'Eigensolver failed: {e}') from e

    return _complementSolve(values, vectors, np.asarray(rhs, dtype=np.float64), theta)


def vkQuantity(profile: WaveProfile, spectrum: SymmetricSpectrum, overlapTol: float = 1e-4) -> float:
    """<Lplus^-1 phi, phi> with Lplus inverted off its numerical kernel."""
    overlap = weakNondegeneracyCheck(profile, spectrum)

    if overlap > overlapTol:
        raise KernelContaminationError(overlap, overlapTol)

    phi = profile.phi.values
    q = _complementSolve(spectrum.eigenvalues, spectrum.eigenvectors, phi, spectrum.theta)
    return float(profile.grid.spacing * np.dot(q, phi))


def participationRatio(vectors: ComplexArray) -> FloatArray:
    """(sum |z|^2)^2 / (n sum |z|^4) per column; 1 for plane waves, small for localized modes."""
    weights = np.abs(vectors) ** 2
    n = vectors.shape[0]
    return np.asarray(np.sum(weights, axis=0) ** 2 / (n * np.sum(weights ** 2, axis=0)))


@dataclass(frozen=True, eq=False)
class FullSpectrum:
    eigenvalues: ComplexArray
    eigenvectors: ComplexArray
    participation: FloatArray
    residuals: FloatArray
    localizationThreshold: float

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def localized(self) -> ComplexArray:
        return np.asarray(self.eigenvalues[self.participation < self.localizationThreshold])

    @property
    def maxReal(self) -> float:
        localized = self.localized
        return float(np.max(localized.real)) if localized.size else 0.0

    @property
    def maxRealUnfiltered(self) -> float:
        return float(np.max(self.eigenvalues.real))

    def certifiedUnstable(self, realPartRelTol: float, eigenResidualTol: float) -> List[complex]:
        tol = realPartRelTol * self.scale
        mask = (self.participation < self.localizationThreshold) & (self.eigenvalues.real > tol) \
            & (self.residuals <= eigenResidualTol * self.scale)
        return [complex(z) for z in self.eigenvalues[mask]]


def fullLinearizationSpectrum(profile: WaveProfile, options: Optional[StabilityOptions] = None,
                              operator: Optional[OperatorMatrix] = None) -> FullSpectrum:
    if options is None:
        options = StabilityOptions()

    if profile.grid.n > options.maxFullDimension:
        raise DimensionTooLargeError(f'n = {profile.grid.n} exceeds {options.maxFullDimension} for the dense '
                                     'non-symmetric eigenproblem')

    if operator is None:
        operator = assembleLplus(profile)

    basis = operator.basis
    derivative = differentiationMatrix(profile.grid, 1)
    reduced = basis.T @ derivative @ operator.entries @ basis

    try:
        values, vectors = scipy.linalg.eig(reduced)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenFailureError(f'Non-symmetric eigensolver failed: {e}') from e

    if not np.all(np.isfinite(values)):
        raise EigenFailureError('Non-symmetric eigensolver returned non-finite eigenvalues')

    residuals = np.linalg.norm(reduced @ vectors - vectors * values[np.newaxis, :], axis=0) \
        / np.linalg.norm(vectors, axis=0)
    lifted = basis @ vectors

    return FullSpectrum(np.asarray(values), np.asarray(lifted), participationRatio(lifted), np.asarray(residuals),
                        options.localizationThreshold)


def spectrumSymmetryDefect(eigenvalues: ComplexArray) -> Tuple[float, float]:
    """Worst distance from each eigenvalue's conjugate and negative conjugate to the spectrum, relative to its scale."""
    scale = float(np.max(np.abs(eigenvalues)))

    def worst(images: ComplexArray) -> float:
        distances = np.abs(images[:, np.newaxis] - eigenvalues[np.newaxis, :])
        return float(np.max(np.min(distances, axis=1)) / scale)

    return worst(np.conj(eigenvalues)), worst(-np.conj(eigenvalues))


def classify(nMinus: int, kernelOverlap: float, vkValue: Optional[float], unstableModes: int,
             overlapTol: float, vkTol: float) -> Tuple[StabilityVerdict, Tuple[str, ...]]:
    if unstableModes > 0:
        return StabilityVerdict.Unstable, (f'{unstableModes} localized eigenvalue(s) with positive real part',)

    reasons: List[str] = []

    if nMinus != 1:
        reasons.append(f'n_minus = {nMinus}, expected 1')

    if kernelOverlap > overlapTol:
        reasons.append(f'kernel overlap {kernelOverlap:.3e} exceeds {overlapTol:.1e}')

    if vkValue is None:
        reasons.append('VK quantity unavailable')
    elif abs(vkValue) <= vkTol:
        reasons.append(f'VK quantity {vkValue:.3e} is numerically zero (tolerance {vkTol:.1e})')
    elif vkValue > 0:
        reasons.append(f'VK quantity {vkValue:.3e} is positive')

    if reasons:
        return StabilityVerdict.Inconclusive, tuple(reasons)

    return StabilityVerdict.Stable, ()


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    eigenvaluesLplus: FloatArray
    nMinus: int
    kernelDim: int
    positiveCount: int
    theta: float
    kernelOverlap: float
    translationResidual: float
    lplusQuadraticForm: float
    expectedQuadraticForm: float
    vkValue: Optional[float]
    vkTolerance: float
    maxRealFull: float
    maxRealUnfiltered: float
    spectralScale: float
    localizedCount: int
    verdict: StabilityVerdict
    reasons: Tuple[str, ...] = ()
    fullEigenvalues: ComplexArray = field(default_factory=lambda: np.zeros(0, dtype=np.complex128))

    @property
    def nondOk(self) -> bool:
        return self.vkValue is not None and abs(self.vkValue) > self.vkTolerance

    def toJson(self) -> Dict[str, Any]:
        return {
            'n_minus': self.nMinus,
            'kernel_dim': self.kernelDim,
            'positive_count': self.positiveCount,
            'theta': self.theta,
            'kernel_overlap': self.kernelOverlap,
            'translation_residual': self.translationResidual,
            'lplus_quadratic_form': self.lplusQuadraticForm,
            'expected_quadratic_form': self.expectedQuadraticForm,
            'vk_value': self.vkValue,
            'vk_tolerance': self.vkTolerance,
            'nond_ok': self.nondOk,
            'max_real_full': self.maxRealFull,
            'max_real_unfiltered': self.maxRealUnfiltered,
            'spectral_scale': self.spectralScale,
            'localized_count': self.localizedCount,
            'verdict': self.verdict.value,
            'reasons': list(self.reasons),
            'smallest_eigenvalues': [float(v) for v in self.eigenvaluesLplus[:5]],
        }


def analyzeStability(profile: WaveProfile, options: Optional[StabilityOptions] = None,
                     full: bool = True) -> SpectrumReport:
    if options is None:
        options = StabilityOptions()

    operator = assembleLplus(profile)
    spectrum = symmetricSpectrum(operator, kernelRelTol=options.kernelRelTol)

    if spectrum.kernelDim > 1:
        warnings.warn(f'Kernel dimension {spectrum.kernelDim} > 1 for {profile.label}', KernelDimensionWarning)

    overlap = weakNondegeneracyCheck(profile, spectrum)

    slope = deriv(profile.phi, 1)
    translationResidual = normL2(applyLplus(profile, slope)) / normL2(slope)
    quadraticForm = inner(applyLplus(profile, profile.phi), profile.phi)
    expected = -(profile.p - 1.0) * profile.family.nonlinearPairing(profile.phi, profile.p)

    vkTolerance = options.vkRelTol * normL2(profile.phi) ** 2

    try:
        vkValue: Optional[float] = vkQuantity(profile, spectrum, options.overlapTol)
    except KernelContaminationError as e:
        logger.warning('VK quantity skipped: %s', e)
        vkValue = None

    if full:
        fullSpectrum = fullLinearizationSpectrum(profile, options, operator)
        unstable = fullSpectrum.certifiedUnstable(options.realPartRelTol, options.eigenResidualTol)
        maxReal, maxRealUnfiltered = fullSpectrum.maxReal, fullSpectrum.maxRealUnfiltered
        scale, localizedCount = fullSpectrum.scale, int(fullSpectrum.localized.size)
        fullEigenvalues = fullSpectrum.eigenvalues
    else:
        unstable = []
        maxReal = maxRealUnfiltered = scale = float('nan')
        localizedCount = 0
        fullEigenvalues = np.zeros(0, dtype=np.complex128)

    result, reasons = classify(spectrum.nMinus, overlap, vkValue, len(unstable), options.overlapTol, vkTolerance)

    logger.info('%s: n_minus=%d kernel_dim=%d overlap=%.2e vk=%s max_real=%.3e verdict=%s',
                profile.label, spectrum.nMinus, spectrum.kernelDim, overlap, vkValue, maxReal, result.value)

    return SpectrumReport(
        eigenvaluesLplus=spectrum.eigenvalues,
        nMinus=spectrum.nMinus,
        kernelDim=spectrum.kernelDim,
        positiveCount=spectrum.positiveCount,
        theta=spectrum.theta,
        kernelOverlap=overlap,
        translationResidual=translationResidual,
        lplusQuadraticForm=quadraticForm,
        expectedQuadraticForm=expected,
        vkValue=vkValue,
        vkTolerance=vkTolerance,
        maxRealFull=maxReal,
        maxRealUnfiltered=maxRealUnfiltered,
        spectralScale=scale,
        localizedCount=localizedCount,
        verdict=result,
        reasons=reasons,
        fullEigenvalues=fullEigenvalues,
    )


def verdict(profile: WaveProfile, options: Optional[StabilityOptions] = None) -> StabilityVerdict:
    return analyzeStability(profile, options).verdict


def assembleFourthOrderOperator(profile: WaveProfile) -> FloatArray:
    """Dense d^4 + omega d^2 + 1 + d(V d), the linearization of the fourth-order profile equation."""
    checkConverged(profile)

    grid = profile.grid
    first = differentiationMatrix(grid, 1)
    potential = profile.family.linearizedPotential(profile.phi.values, profile.p)

    return np.asarray(
        differentiationMatrix(grid, 4) + profile.omega * differentiationMatrix(grid, 2) + np.eye(grid.n)
        + first @ (potential[:, np.newaxis] * first)
    )


@dataclass(frozen=True)
class FourthOrderOperatorReport:
    kernelResidual: float
    conjugationDefect: float


def fourthOrderOperatorCheck(profile: WaveProfile, seed: int = 0) -> FourthOrderOperatorReport:
    """L phi = 0 for the fourth-order linearization, and L = -d Lplus d on a random smooth mean-free field."""
    matrix = assembleFourthOrderOperator(profile)
    phi = profile.phi.values

    kernelResidual = float(np.linalg.norm(matrix @ phi) / np.linalg.norm(phi))

    rng = np.random.default_rng(seed)
    grid = profile.grid
    coefficients = rng.standard_normal(grid.rwavenumbers.size) + 1j * rng.standard_normal(grid.rwavenumbers.size)
    coefficients *= np.exp(-(grid.rwavenumbers / 4.0) ** 2)
    coefficients[0] = 0.0
    h = Field.fromSpectrum(grid, coefficients, True)

    direct = matrix @ h.values
    conjugated = -deriv(applyLplus(profile, deriv(h, 1)), 1).values
    defect = float(np.linalg.norm(direct - conjugated) / np.linalg.norm(direct))

    return FourthOrderOperatorReport(kernelResidual, defect)


@dataclass(frozen=True)
class GridConvergenceReport:
    n: int
    omegaChange: float
    vkChange: float
    eigenvalueChanges: Tuple[float, ...]

    @property
    def worst(self) -> float:
        return max((self.omegaChange, self.vkChange) + self.eigenvalueChanges)


def _relativeChange(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1.0)


def gridConvergence(family: ModelFamily, p: float, lam: float, halfLength: float, n: int,
                    opts: Optional[SolverOptions] = None, options: Optional[StabilityOptions] = None,
                    count: int = 5) -> GridConvergenceReport:
    """Compare omega, the VK quantity and the smallest Lplus eigenvalues between n and 2n nodes on the same box."""
    if options is None:
        options = StabilityOptions()

    results = []

    for nodes in (n, 2 * n):
        profile = minimize(family, p, lam, makeGrid(halfLength, nodes), opts)
        spectrum = symmetricSpectrum(assembleLplus(profile), kernelRelTol=options.kernelRelTol)
        results.append((profile.omega, vkQuantity(profile, spectrum, options.overlapTol), spectrum.eigenvalues[:count]))

    (omegaA, vkA, eigA), (omegaB, vkB, eigB) = results

    return GridConvergenceReport(
        n,
        _relativeChange(omegaA, omegaB),
        _relativeChange(vkA, vkB),
        tuple(_relativeChange(float(a), float(b)) for a, b in zip(eigA, eigB)),
    )
