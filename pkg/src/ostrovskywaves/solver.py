import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Dict, List, Callable, Sequence, Any

import numpy as np

from .exceptions import InvalidOptionsError, BadEpsilonError, BadAlphaError, NoConvergenceError, DivergedError, \
    InsufficientSamplesError, NumericalFailure, ParityWarning, BoundaryAmplitudeWarning, OmegaOutOfRangeError
from .functionals import ModelFamily, WaveProfile, energySecondOrder, gradientSecondOrder
from .spectral import FloatArray, Field, Grid, makeGrid, projectZeroMean, normL2, inner, boundaryAmplitudeRatio, \
    decayRateKappa, evaluateAt


__all__ = [
    'SolverOptions',
    'CostCurve',
    'SubadditivityTriple',
    'SubadditivityReport',
    'admissibleAlphaInterval',
    'initialGuess',
    'locatePeak',
    'recenter',
    'parityDefect',
    'minimize',
    'solveOnAutoGrid',
    'costCurve',
    'checkSubadditivity',
    'AUTO_DECAY_LENGTHS',
    'PROVISIONAL_HALF_LENGTH',
]


logger = logging.getLogger(__name__)


AUTO_DECAY_LENGTHS = 12.0
PROVISIONAL_HALF_LENGTH = 32.0
PARITY_TOLERANCE = 1e-6
BOUNDARY_TOLERANCE = 1e-5
MAX_STEP_FACTOR = 64.0
MIN_STEP = 1e-14
ROUNDING_SLACK = 64.0 * float(np.finfo(float).eps)

IterationCallback = Callable[[int, Field, float], None]


def admissibleAlphaInterval(p: float) -> Tuple[float, float]:
    return max((p - 1.0) / 2.0, 2.0 / (p + 1.0)), 1.0


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    maxIter: int = 50000
    step0: float = 1.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    stepGrowth: float = 2.0
    recenterEvery: int = 50
    seedEpsilon: float = 0.3
    seedAlpha: Optional[float] = None
    stallWindow: int = 5000
    divergenceBound: float = 1e6

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise InvalidOptionsError(f'tol must be positive ({self.tol})')

        if not 0 < self.backtrack < 1:
            raise InvalidOptionsError(f'backtrack must lie in (0, 1) ({self.backtrack})')

        if not 0 < self.armijo < 1:
            raise InvalidOptionsError(f'armijo must lie in (0, 1) ({self.armijo})')

        if self.maxIter < 1 or self.recenterEvery < 1 or self.stallWindow < 1:
            raise InvalidOptionsError('maxIter, recenterEvery and stallWindow must be positive')

        if not self.step0 > 0 or self.stepGrowth < 1:
            raise InvalidOptionsError(f'Need step0 > 0 and stepGrowth >= 1 ({self.step0}, {self.stepGrowth})')

        if not 0 < self.seedEpsilon < 1:
            raise BadEpsilonError(f'seedEpsilon must lie in (0, 1) ({self.seedEpsilon})')

        if self.seedAlpha is not None and not 0 < self.seedAlpha < 1:
            raise BadAlphaError(f'seedAlpha must lie in (0, 1) ({self.seedAlpha})')

    def checkSeedAlpha(self, p: float) -> None:
        if self.seedAlpha is None:
            return

        low, high = admissibleAlphaInterval(p)

        if not low < self.seedAlpha < high:
            raise BadAlphaError(f'seedAlpha = {self.seedAlpha} must lie in ({low:.4g}, {high:g}) for p = {p}')

    def alphaFor(self, p: float) -> float:
        self.checkSeedAlpha(p)

        if self.seedAlpha is not None:
            return self.seedAlpha

        low, high = admissibleAlphaInterval(p)
        return 0.5 * (low + high)

    def replace(self, **changes: object) -> 'SolverOptions':
        return replace(self, **changes)  # type: ignore[arg-type]


def _bump(y: FloatArray) -> FloatArray:
    return np.asarray(np.exp(-y * y))


def initialGuess(grid: Grid, lam: float, variant: str, epsilon: float, alpha: Optional[float] = None,
                 p: Optional[float] = None) -> Field:
    """
    Modulated bump 2 sqrt(eps) chi(eps x) cos(x), optionally with the eps^alpha cos(2x) correction, projected to
    zero mean and rescaled to ||v||^2 = lam.

    :param grid: the grid to sample on
    :type grid: Grid
    :param lam: target squared L2 norm
    :type lam: float
    :param variant: ``'J'`` for the pure cosine bump, ``'I'`` for the bump with the second harmonic
    :type variant: str
    :param epsilon: envelope scale, in (0, 1)
    :type epsilon: float
    :param alpha: exponent of the second harmonic amplitude, required for variant I unless p is given
    :type alpha: Optional[float]
    :param p: when given, alpha is checked against the p-dependent admissible interval
    :type p: Optional[float]
    :return: a mean-free field with squared norm lam
    :rtype: Field
    """
    if not 0 < epsilon < 1:
        raise BadEpsilonError(f'epsilon must lie in (0, 1) ({epsilon})')

    if not lam > 0:
        raise ValueError(f'lambda must be positive ({lam})')

    x = np.array(grid.nodes)
    envelope = 2.0 * np.sqrt(epsilon) * _bump(epsilon * x)

    if variant == 'J':
        values = envelope * np.cos(x)
    elif variant == 'I':
        if alpha is None:
            if p is None:
                raise BadAlphaError('Variant I needs alpha or p')
            alpha = SolverOptions().alphaFor(p)

        low, high = admissibleAlphaInterval(p) if p is not None else (0.0, 1.0)

        if not low < alpha < high:
            raise BadAlphaError(f'alpha = {alpha} must lie in ({low:.4g}, {high:g})')

        values = envelope * (np.cos(x) + epsilon ** alpha * np.cos(2.0 * x))
    else:
        raise ValueError(f'Unknown seed variant ({variant}), expected J or I')

    seed = projectZeroMean(Field(grid, values))
    return seed * np.sqrt(lam / normL2(seed) ** 2)


def locatePeak(u: Field) -> float:
    """Position of max |u|, refined past the grid by Newton steps on the interpolant's derivative."""
    grid = u.grid
    magnitude = np.abs(u.values)
    j = int(np.argmax(magnitude))

    left, centre, right = magnitude[j - 1], magnitude[j], magnitude[(j + 1) % grid.n]
    curvature = left - 2.0 * centre + right
    offset = 0.5 * (left - right) / curvature if curvature != 0 else 0.0
    x = float(grid.nodes[j] + np.clip(offset, -0.5, 0.5) * grid.spacing)

    for _ in range(8):
        slope = evaluateAt(u, x, 1)
        bend = evaluateAt(u, x, 2)

        if bend == 0.0:
            break

        step = slope / bend

        if abs(step) > grid.spacing:
            break

        x -= step

        if abs(step) < 1e-14 * grid.halfLength:
            break

    return x


def recenter(u: Field) -> Field:
    return u.shifted(-locatePeak(u))


def parityDefect(u: Field) -> float:
    norm = normL2(u)

    if norm == 0.0:
        return 0.0

    return normL2(u - u.reflected()) / norm


def _retract(w: Field, lam: float) -> Field:
    return w * np.sqrt(lam / normL2(w) ** 2)


class _Preconditioner:
    """Spectral inverse of -d^2 - d^-2 - min(omega, 1), positive on every nonzero mode."""

    def __init__(self, grid: Grid) -> None:
        xi = grid.rwavenumbers
        self._free = np.zeros(xi.shape)
        nonzero = xi != 0.0
        self._free[nonzero] = xi[nonzero] ** 2 + xi[nonzero] ** -2.0
        self._nonzero = nonzero
        self.grid = grid

    def apply(self, f: Field, omega: float) -> Field:
        symbol = np.zeros(self._free.shape)
        symbol[self._nonzero] = 1.0 / (self._free[self._nonzero] - min(omega, 1.0))
        return Field.fromSpectrum(self.grid, f.spectrum * symbol, True)


def _residualState(u: Field, lam: float, family: ModelFamily, p: float) -> Tuple[Field, float, float]:
    g = gradientSecondOrder(u, family, p)
    omega = inner(g, u) / lam
    residual = normL2(g - omega * u) / np.sqrt(lam)
    return g, omega, residual


def minimize(family: ModelFamily, p: float, lam: float, grid: Grid, opts: Optional[SolverOptions] = None,
             initial: Optional[Field] = None, callback: Optional[IterationCallback] = None) -> WaveProfile:
    family.checkExponent(p)

    if not lam > 0:
        raise ValueError(f'lambda must be positive ({lam})')

    if opts is None:
        opts = SolverOptions()

    if initial is None:
        if family is ModelFamily.AbsPower:
            initial = initialGuess(grid, lam, 'I', opts.seedEpsilon, opts.alphaFor(p), p)
        else:
            initial = initialGuess(grid, lam, 'J', opts.seedEpsilon)
    else:
        grid.checkSame(initial.grid)

    u = _retract(projectZeroMean(initial), lam)

    if family is ModelFamily.AbsPower and family.nonlinearPairing(u, p) < 0:
        u = -u

    preconditioner = _Preconditioner(grid)
    energy = energySecondOrder(u, family, p)
    step = opts.step0
    bestResidual = np.inf
    lastImprovement = 0

    logger.debug('Minimizing %s p=%g lambda=%g on L=%g n=%d', family.value, p, lam, grid.halfLength, grid.n)

    iteration = 0
    g, omega, residual = _residualState(u, lam, family, p)

    while residual > opts.tol:
        iteration += 1

        if iteration > opts.maxIter:
            raise NoConvergenceError(opts.maxIter, residual, 'iteration limit reached')

        if residual < bestResidual:
            bestResidual = residual
            lastImprovement = iteration
        elif iteration - lastImprovement > opts.stallWindow:
            raise NoConvergenceError(iteration, residual)

        kg = preconditioner.apply(g, omega)
        ku = preconditioner.apply(u, omega)
        direction = -(kg - (inner(kg, u) / inner(ku, u)) * ku)
        slope = inner(g, direction)

        t = step
        accepted: Optional[Tuple[Field, float]] = None

        while t >= MIN_STEP:
            trial = _retract(u + t * direction, lam)
            trialEnergy = energySecondOrder(trial, family, p)

            if not np.isfinite(trialEnergy):
                raise DivergedError(iteration, 'non-finite energy')

            if trialEnergy <= energy + opts.armijo * t * slope:
                accepted = trial, trialEnergy
                break

            if trialEnergy <= energy + ROUNDING_SLACK * max(1.0, abs(energy)):
                if _residualState(trial, lam, family, p)[2] < residual:
                    accepted = trial, trialEnergy
                    break

            t *= opts.backtrack

        if accepted is None:
            raise NoConvergenceError(iteration, residual, 'line search failed')

        u, energy = accepted
        step = min(t * opts.stepGrowth, MAX_STEP_FACTOR * opts.step0)

        if energy < -opts.divergenceBound * lam or u.maxAbs > opts.divergenceBound:
            raise DivergedError(iteration, f'energy {energy:.3e}, amplitude {u.maxAbs:.3e}')

        if iteration % opts.recenterEvery == 0:
            u = _retract(recenter(u), lam)
            energy = energySecondOrder(u, family, p)
            logger.debug('iteration %d: energy=%.16g residual=%.3e step=%.3e', iteration, energy, residual, step)

        if callback is not None:
            callback(iteration, u, energy)

        g, omega, residual = _residualState(u, lam, family, p)

    u = _retract(recenter(u), lam)
    g, omega, residual = _residualState(u, lam, family, p)

    defect = parityDefect(u)
    boundary = boundaryAmplitudeRatio(u)

    logger.info('Converged %s p=%g lambda=%g in %d iterations: omega=%.12g residual=%.3e parity=%.2e boundary=%.2e',
                family.value, p, lam, iteration, omega, residual, defect, boundary)

    if defect > PARITY_TOLERANCE:
        warnings.warn(f'Profile is not even about its peak (defect {defect:.3e})', ParityWarning)

    try:
        return WaveProfile(family, p, lam, omega, u, residual, iteration, energySecondOrder(u, family, p))
    except OmegaOutOfRangeError as e:
        raise NoConvergenceError(iteration, residual, f'multiplier out of range ({e})') from e


def solveOnAutoGrid(family: ModelFamily, p: float, lam: float, n: int = 1024,
                    opts: Optional[SolverOptions] = None) -> WaveProfile:
    """Solve on a provisional box, then once more on a box holding AUTO_DECAY_LENGTHS decay lengths if needed."""
    profile = minimize(family, p, lam, makeGrid(PROVISIONAL_HALF_LENGTH, n), opts)
    kappa = decayRateKappa(profile.omega)

    if PROVISIONAL_HALF_LENGTH * kappa < AUTO_DECAY_LENGTHS:
        halfLength = 1.1 * AUTO_DECAY_LENGTHS / kappa
        logger.info('Box too small (L kappa = %.3f), re-solving on L = %.4g', PROVISIONAL_HALF_LENGTH * kappa, halfLength)

        profile = minimize(family, p, lam, makeGrid(halfLength, n), opts)
        kappa = decayRateKappa(profile.omega)

        if halfLength * kappa < AUTO_DECAY_LENGTHS:
            warnings.warn(f'Box still holds only {halfLength * kappa:.2f} decay lengths', BoundaryAmplitudeWarning)

    ratio = boundaryAmplitudeRatio(profile.phi)

    if ratio > BOUNDARY_TOLERANCE:
        warnings.warn(f'Boundary amplitude ratio {ratio:.3e} exceeds {BOUNDARY_TOLERANCE}', BoundaryAmplitudeWarning)

    return profile


@dataclass(frozen=True)
class CostCurve:
    family: ModelFamily
    p: float
    lambdas: Tuple[float, ...]
    values: Tuple[float, ...]
    profiles: Tuple[WaveProfile, ...] = ()
    failures: Dict[float, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.lambdas) != len(self.values):
            raise ValueError('lambdas and values must have the same length')

        if self.profiles and len(self.profiles) != len(self.lambdas):
            raise ValueError('profiles must match lambdas')

        if not all(np.isfinite(self.values)):
            raise ValueError('Cost values must be finite')

    @property
    def partial(self) -> bool:
        return bool(self.failures)

    @property
    def omegas(self) -> Tuple[float, ...]:
        return tuple(profile.omega for profile in self.profiles)

    @property
    def omegaRange(self) -> Optional[Tuple[float, float]]:
        if not self.profiles:
            return None
        return min(self.omegas), max(self.omegas)

    def ratios(self) -> Tuple[float, ...]:
        return tuple(m / lam for lam, m in zip(self.lambdas, self.values))


def costCurve(family: ModelFamily, p: float, lambdas: Sequence[float], grid: Optional[Grid] = None,
              opts: Optional[SolverOptions] = None, n: int = 1024, workers: int = 1) -> CostCurve:
    """
    Sweep lambda. Each solve is independent; failures are collected rather than raised so the sweep returns the
    partial curve. ``grid=None`` solves each lambda on its own automatic box with n nodes.
    """
    family.checkExponent(p)
    lambdas = [float(lam) for lam in lambdas]

    if not lambdas or any(lam <= 0 for lam in lambdas) or any(b <= a for a, b in zip(lambdas, lambdas[1:])):
        raise InvalidOptionsError(f'lambdas must be positive and strictly increasing ({lambdas})')

    def solveOne(lam: float) -> Tuple[float, Optional[WaveProfile], Optional[str]]:
        try:
            if grid is None:
                return lam, solveOnAutoGrid(family, p, lam, n, opts), None
            return lam, minimize(family, p, lam, grid, opts), None
        except NumericalFailure as e:
            logger.warning('Solve failed for lambda=%g: %s', lam, e)
            return lam, None, f'{type(e).__name__}: {e}'

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(solveOne, lambdas))
    else:
        results = [solveOne(lam) for lam in lambdas]

    solved = [(lam, profile) for lam, profile, _ in results if profile is not None]
    failures = {lam: message for lam, _, message in results if message is not None}

    curve = CostCurve(
        family, p,
        tuple(lam for lam, _ in solved),
        tuple(profile.reportedEnergy for _, profile in solved),
        tuple(profile for _, profile in solved),
        failures
    )

    if curve.omegaRange is not None:
        logger.info('Observed omega range over the sweep: [%.8g, %.8g]', *curve.omegaRange)

    return curve


@dataclass(frozen=True)
class SubadditivityTriple:
    lam: float
    alpha: float
    rest: float
    margin: float

    @property
    def holds(self) -> bool:
        return self.margin > 0


@dataclass(frozen=True)
class SubadditivityReport:
    triples: Tuple[SubadditivityTriple, ...]
    ratios: Tuple[float, ...]
    ratioViolations: Tuple[Tuple[float, float], ...]

    @property
    def violations(self) -> Tuple[SubadditivityTriple, ...]:
        return tuple(triple for triple in self.triples if not triple.holds)

    @property
    def minimumMargin(self) -> float:
        return min(triple.margin for triple in self.triples)

    @property
    def passed(self) -> bool:
        return not self.violations and not self.ratioViolations

    def toJson(self) -> Dict[str, Any]:
        return {
            'passed': self.passed,
            'minimum_margin': self.minimumMargin,
            'triples': [
                {'lambda': t.lam, 'alpha': t.alpha, 'rest': t.rest, 'margin': t.margin} for t in self.triples
            ],
            'ratios': list(self.ratios),
            'ratio_violations': [list(pair) for pair in self.ratioViolations],
        }


def checkSubadditivity(curve: CostCurve) -> SubadditivityReport:
    """m(lam) < m(alpha) + m(lam - alpha) for every split representable on the samples, and m(lam)/lam decreasing."""
    lambdas = np.asarray(curve.lambdas)
    values = np.asarray(curve.values)

    if len(lambdas) < 3:
        raise InsufficientSamplesError(f'Need at least 3 samples, got {len(lambdas)}')

    triples: List[SubadditivityTriple] = []

    for i, lam in enumerate(lambdas):
        for j, alpha in enumerate(lambdas):
            if alpha > lam / 2.0 * (1.0 + 1e-12):
                break

            matches = np.flatnonzero(np.isclose(lambdas, lam - alpha, rtol=1e-9, atol=1e-12))

            if matches.size == 0:
                continue

            k = int(matches[0])
            margin = float(values[j] + values[k] - values[i])
            triples.append(SubadditivityTriple(float(lam), float(alpha), float(lambdas[k]), margin))

    if not triples:
        raise InsufficientSamplesError('No sample is the sum of two other samples')

    ratios = tuple(float(r) for r in values / lambdas)
    ratioViolations = tuple(
        (float(lambdas[i]), float(lambdas[i + 1])) for i in range(len(ratios) - 1) if not ratios[i + 1] < ratios[i]
    )

    report = SubadditivityReport(tuple(triples), ratios, ratioViolations)

    for triple in report.violations:
        logger.warning('Subadditivity violated: m(%g) >= m(%g) + m(%g) (margin %.3e)',
                       triple.lam, triple.alpha, triple.rest, triple.margin)

    return report
