import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from .config import RunConfig, COMMANDS, loadConfig, applyOverrides, outDirFor, lambdasFor, gridFor, nodesFor, \
    solverOptionsFor, stabilityOptionsFor, evolveSettingsFor
from .diagnostics import PohozaevReport, DecayFit, VerificationRow, pohozaevResiduals, pohozaevFourthOrder, \
    fitDecay, verificationRow
from .evolution import PerturbationResult, perturbationExperiment
from .exceptions import OstrovskyError, NumericalFailure, NotConvergedError, UsageError, IncompatibleArtifactError, \
    InsufficientSamplesError
from .functionals import ModelFamily, WaveProfile, elResidualFourthOrder
from .representations import writeJson, writeReport, writeProfile, writeCostCurve, loadCostCurveCsv, \
    writeSymmetricEigenvalues, writeFullEigenvalues, writeTrace, writeVerificationTable
from .solver import SolverOptions, CostCurve, minimize, solveOnAutoGrid, costCurve, checkSubadditivity
from .spectral import makeGrid
from .stability import StabilityOptions, StabilityVerdict, SpectrumReport, analyzeStability


__all__ = [
    'EXIT_OK',
    'EXIT_VERIFICATION_FAILED',
    'EXIT_USAGE',
    'EXIT_NUMERICAL_FAILURE',
    'buildParser',
    'configureLogging',
    'run',
    'main',
]


logger = logging.getLogger(__name__)


EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL_FAILURE = 3

POHOZAEV_TOLERANCE = 1e-4
DECAY_TOLERANCE = 0.1
PERTURBATION_RATIO_LIMIT = 10.0
TRAVELING_WAVE_TOLERANCE = 1e-4


@dataclass(frozen=True)
class _Context:
    config: RunConfig
    outDir: Path
    family: ModelFamily
    p: float
    halfLength: Optional[float]
    n: int
    solverOptions: SolverOptions

    @classmethod
    def fromConfig(cls, config: RunConfig) -> '_Context':
        family = ModelFamily.fromName(config['family'])
        family.checkExponent(config['p'])

        return cls(
            config, outDirFor(config), family, float(config['p']),
            gridFor(config), nodesFor(config), solverOptionsFor(config)
        )

    def solve(self, lam: float) -> WaveProfile:
        if self.halfLength is None:
            return solveOnAutoGrid(self.family, self.p, lam, self.n, self.solverOptions)

        return minimize(self.family, self.p, lam, makeGrid(self.halfLength, self.n), self.solverOptions)

    def path(self, kind: str, profile: WaveProfile, suffix: str) -> Path:
        return self.outDir / f'{kind}_{profile.label}.{suffix}'


def _cellContext(profile: WaveProfile) -> Dict[str, Any]:
    return {'family': profile.family.value, 'p': profile.p, 'lambda': profile.lam, 'omega': profile.omega}


def _pohozaevPassed(*reports: PohozaevReport) -> bool:
    return all(report.worst <= POHOZAEV_TOLERANCE for report in reports)


def _perturbationPassed(result: PerturbationResult) -> bool:
    if result.trace.blowupTime is not None:
        return False

    limit = TRAVELING_WAVE_TOLERANCE if result.travelingWaveOnly else PERTURBATION_RATIO_LIMIT
    return result.ratio <= limit


def _runSolve(ctx: _Context) -> int:
    for lam in lambdasFor(ctx.config):
        profile = ctx.solve(lam)
        path = writeProfile(profile, ctx.outDir)
        logger.info('Solved %s: omega = %.12g, m = %.12g -> %s', profile.label, profile.omega, profile.reportedEnergy,
                    path)

    return EXIT_OK


class _AllSolvesFailed(NumericalFailure):
    ...


def _sweepCurve(ctx: _Context) -> CostCurve:
    lambdas = lambdasFor(ctx.config)

    if len(lambdas) < 2:
        raise UsageError(f'A sweep needs at least two lambda values, got {len(lambdas)}')

    grid = None if ctx.halfLength is None else makeGrid(ctx.halfLength, ctx.n)
    curve = costCurve(ctx.family, ctx.p, lambdas, grid, ctx.solverOptions, ctx.n, ctx.config.get('workers', 1))

    profileFiles = [writeProfile(profile, ctx.outDir) for profile in curve.profiles]
    writeCostCurve(curve, ctx.outDir, profileFiles)

    if not curve.profiles:
        raise _AllSolvesFailed(f'Every solve of the sweep failed: {curve.failures}')

    return curve


def _writeSubadditivity(ctx: _Context, curve: CostCurve) -> bool:
    report = checkSubadditivity(curve)
    writeReport(report, ctx.outDir / 'subadditivity.json', family=curve.family.value, p=curve.p)
    logger.info('Subadditivity over %d triples: %s (minimum margin %.3e)',
                len(report.triples), 'passed' if report.passed else 'FAILED', report.minimumMargin)
    return report.passed


def _runSweep(ctx: _Context) -> int:
    curve = _sweepCurve(ctx)
    status = EXIT_NUMERICAL_FAILURE if curve.partial else EXIT_OK

    try:
        if not _writeSubadditivity(ctx, curve):
            status = max(status, EXIT_VERIFICATION_FAILED)
    except InsufficientSamplesError as e:
        logger.warning('Subadditivity not checked: %s', e)

    return status


def _runSubadditivity(config: RunConfig) -> int:
    if 'curve' not in config:
        ctx = _Context.fromConfig(config)
        curve = _sweepCurve(ctx)
    else:
        family = ModelFamily.fromName(config['family']) if 'family' in config else None
        curve = loadCostCurveCsv(config['curve'], family, config.get('p'))
        ctx = _Context(config, outDirFor(config), curve.family, curve.p, None, nodesFor(config), SolverOptions())

    return EXIT_OK if _writeSubadditivity(ctx, curve) else EXIT_VERIFICATION_FAILED


def _stability(ctx: _Context, profile: WaveProfile, options: StabilityOptions) -> SpectrumReport:
    report = analyzeStability(profile, options)

    writeReport(report, ctx.path('spectrum', profile, 'json'), **_cellContext(profile))
    writeSymmetricEigenvalues(report.eigenvaluesLplus, ctx.path('eigen_lplus', profile, 'csv'))
    writeFullEigenvalues(report.fullEigenvalues, ctx.path('eigen_full', profile, 'csv'))

    return report


def _runStability(ctx: _Context) -> int:
    options = stabilityOptionsFor(ctx.config)
    passed = True

    for lam in lambdasFor(ctx.config):
        profile = ctx.solve(lam)
        writeProfile(profile, ctx.outDir)
        report = _stability(ctx, profile, options)
        passed = passed and report.verdict is StabilityVerdict.Stable

    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


def _pohozaev(ctx: _Context, profile: WaveProfile, elResidual4: float) -> List[PohozaevReport]:
    reports = [pohozaevResiduals(profile), pohozaevFourthOrder(profile)]

    data = _cellContext(profile)
    data.update(
        second_order=reports[0].toJson(),
        fourth_order=reports[1].toJson(),
        el_residual=profile.elResidual,
        el_residual_4=elResidual4,
    )
    writeJson(data, ctx.path('pohozaev', profile, 'json'))

    return reports


def _runPohozaev(ctx: _Context) -> int:
    passed = True

    for lam in lambdasFor(ctx.config):
        profile = ctx.solve(lam)
        writeProfile(profile, ctx.outDir)
        reports = _pohozaev(ctx, profile, elResidualFourthOrder(profile))
        passed = passed and _pohozaevPassed(*reports)

    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


def _evolve(ctx: _Context, profile: WaveProfile) -> PerturbationResult:
    settings = evolveSettingsFor(ctx.config)
    result = perturbationExperiment(
        profile, settings['delta'], settings['T'], settings['dt'], settings['seed'], settings.get('sampleEvery')
    )

    writeTrace(result.trace, ctx.path('trace', profile, 'csv'))
    writeReport(result, ctx.path('evolve', profile, 'json'), **_cellContext(profile))

    return result


def _runEvolve(ctx: _Context) -> int:
    evolveSettingsFor(ctx.config)
    passed = True

    for lam in lambdasFor(ctx.config):
        profile = ctx.solve(lam)
        writeProfile(profile, ctx.outDir)
        passed = passed and _perturbationPassed(_evolve(ctx, profile))

    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


def _decay(ctx: _Context, profile: WaveProfile) -> DecayFit:
    fit = fitDecay(profile)
    writeReport(fit, ctx.path('decay', profile, 'json'), **_cellContext(profile))
    return fit


def _runVerifyAll(ctx: _Context) -> int:
    evolveSettingsFor(ctx.config)
    options = stabilityOptionsFor(ctx.config)
    rows: List[VerificationRow] = []
    passed = True

    for lam in lambdasFor(ctx.config):
        profile = ctx.solve(lam)
        writeProfile(profile, ctx.outDir)

        elResidual4 = elResidualFourthOrder(profile)
        pohozaev, pohozaev4 = _pohozaev(ctx, profile, elResidual4)
        decay = _decay(ctx, profile)
        spectrum = _stability(ctx, profile, options)
        perturbation = _evolve(ctx, profile)

        rows.append(verificationRow(profile, profile.reportedEnergy, elResidual4, pohozaev, pohozaev4, decay, spectrum,
                                    perturbation))

        cellPassed = (
            _pohozaevPassed(pohozaev, pohozaev4)
            and decay.withinTolerance(DECAY_TOLERANCE)
            and spectrum.verdict is StabilityVerdict.Stable
            and _perturbationPassed(perturbation)
        )

        if not cellPassed:
            logger.warning('Verification failed for %s', profile.label)

        passed = passed and cellPassed

    writeVerificationTable(rows, ctx.outDir / 'verification.csv')
    return EXIT_OK if passed else EXIT_VERIFICATION_FAILED


_HANDLERS: Dict[str, Callable[[_Context], int]] = {
    'solve': _runSolve,
    'sweep': _runSweep,
    'stability': _runStability,
    'evolve': _runEvolve,
    'pohozaev': _runPohozaev,
    'verify-all': _runVerifyAll,
}


def _reportFailure(e: BaseException) -> None:
    sys.stderr.write(f'{type(e).__name__}: {e}\n')


def run(config: RunConfig) -> int:
    """
    Execute one validated run configuration and write its artifacts.

    :param config: a configuration that passed validateConfig
    :type config: RunConfig
    :return: 0 when every check passed, 1 on a failed check, 2 on a usage error, 3 on a numerical failure
    :rtype: int
    """
    command = config['command']

    try:
        if command == 'subadd':
            return _runSubadditivity(config)

        return _HANDLERS[command](_Context.fromConfig(config))
    except (NumericalFailure, NotConvergedError) as e:
        _reportFailure(e)
        return EXIT_NUMERICAL_FAILURE
    except (UsageError, IncompatibleArtifactError, OSError) as e:
        _reportFailure(e)
        return EXIT_USAGE
    except OstrovskyError as e:
        _reportFailure(e)
        return EXIT_USAGE if isinstance(e, ValueError) else EXIT_VERIFICATION_FAILED
    except ValueError as e:
        _reportFailure(e)
        return EXIT_USAGE


def _halfLength(text: str) -> Union[str, float]:
    if text == 'auto':
        return text

    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected a number or "auto", got {text!r}')

    if not value > 0:
        raise argparse.ArgumentTypeError(f'L must be positive ({value})')

    return value


def buildParser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='ostrovskywaves',
        description='Compute and verify ground-state traveling waves of generalized Ostrovsky equations.'
    )

    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--config', help='JSON run configuration; flags override its fields')
    parser.add_argument('--family', choices=[family.value for family in ModelFamily])
    parser.add_argument('--p', type=float)
    parser.add_argument('--lambda', dest='lambdas', type=float, nargs='+', metavar='LAMBDA')
    parser.add_argument('--L', dest='halfLength', type=_halfLength, help='half length of the box, or "auto"')
    parser.add_argument('--n', type=int, help='number of grid nodes, a power of two >= 64')
    parser.add_argument('--tol', type=float)
    parser.add_argument('--max-iter', dest='maxIter', type=int)
    parser.add_argument('--T', dest='T', type=float)
    parser.add_argument('--dt', type=float)
    parser.add_argument('--delta', type=float)
    parser.add_argument('--seed', type=int)
    parser.add_argument('--sample-every', dest='sampleEvery', type=int)
    parser.add_argument('--curve', help='existing curve CSV for the subadd command')
    parser.add_argument('--out-dir', dest='outDir')
    parser.add_argument('--workers', type=int)

    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument('--verbose', action='store_true')
    verbosity.add_argument('--debug', action='store_true')

    return parser


def configureLogging(verbose: bool = False, debug: bool = False) -> None:
    level = logging.DEBUG if debug else logging.INFO if verbose else logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr, format='%(levelname)s %(name)s: %(message)s')
    logging.captureWarnings(True)


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        'command': args.command,
        'family': args.family,
        'p': args.p,
        'lambda': args.lambdas,
        'grid.L': args.halfLength,
        'grid.n': args.n,
        'solver.tol': args.tol,
        'solver.maxIter': args.maxIter,
        'evolve.T': args.T,
        'evolve.dt': args.dt,
        'evolve.delta': args.delta,
        'evolve.seed': args.seed,
        'evolve.sampleEvery': args.sampleEvery,
        'curve': args.curve,
        'out_dir': args.outDir,
        'workers': args.workers,
    }


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = buildParser().parse_args(argv)
    configureLogging(args.verbose, args.debug)

    try:
        base: Dict[str, Any] = dict(loadConfig(args.config, validate=False)) if args.config else {}
        config = applyOverrides(base, _overrides(args))
    except UsageError as e:
        _reportFailure(e)
        return EXIT_USAGE

    return run(config)
