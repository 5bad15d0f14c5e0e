import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from .config import PathLike, processPath
from .columns import CsvSchema, FIELD_SCHEMA, PROFILE_SCHEMA, CURVE_SCHEMA, TRACE_SCHEMA, EIGEN_FULL_SCHEMA, \
    EIGEN_SYMMETRIC_SCHEMA, VERIFICATION_SCHEMA
from .diagnostics import VerificationRow
from .evolution import EvolutionTrace
from .exceptions import IncompatibleArtifactError
from .functionals import ModelFamily, WaveProfile
from .helper import atomicWrite, acceptNone
from .protocols import JsonRepresentable
from .solver import CostCurve
from .spectral import Field, FloatArray, ComplexArray, makeGrid
from .version import CURRENT_VERSION, Version


__all__ = [
    'writeJson',
    'readJson',
    'writeCsv',
    'readCsv',
    'writeReport',
    'fieldToJson',
    'fieldFromJson',
    'writeFieldCsv',
    'profileToJson',
    'profileFromJson',
    'writeProfile',
    'loadProfile',
    'writeCostCurve',
    'loadCostCurveCsv',
    'writeSymmetricEigenvalues',
    'writeFullEigenvalues',
    'writeTrace',
    'writeVerificationTable',
]


logger = logging.getLogger(__name__)


optionalFloat = acceptNone(float)


def writeJson(data: Dict[str, Any], filePath: PathLike) -> Path:
    """Write a JSON document stamped with the producer version; keys are sorted so reruns are byte-identical."""
    path = processPath(filePath)
    stamped = dict(data)
    stamped['producer'] = CURRENT_VERSION.producer

    with atomicWrite(path) as handle:
        json.dump(stamped, handle, sort_keys=True, indent=2)
        handle.write('\n')

    logger.debug('Wrote %s', path)
    return path


def readJson(filePath: PathLike) -> Dict[str, Any]:
    """Load an artifact written by writeJson, rejecting foreign or incompatible producers."""
    path = processPath(filePath)

    with path.open('r', encoding='utf-8') as handle:
        data = json.load(handle)

    if not isinstance(data, dict) or 'producer' not in data:
        raise IncompatibleArtifactError(f'{path} carries no producer stamp')

    CURRENT_VERSION.checkCompatible(Version.fromProducer(data['producer']))
    return data


def writeCsv(schema: CsvSchema, rows: Iterable[Sequence[Any]], filePath: PathLike) -> Path:
    path = processPath(filePath)

    with atomicWrite(path, newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(schema.header)

        for row in rows:
            writer.writerow(schema.formatRow(row))

    logger.debug('Wrote %s', path)
    return path


def readCsv(schema: CsvSchema, filePath: PathLike) -> List[Dict[str, Any]]:
    path = processPath(filePath)

    with path.open('r', encoding='utf-8', newline='') as handle:
        reader = csv.reader(handle)
        schema.checkHeader(next(reader, []))
        return [schema.parseRow(row) for row in reader]


def writeReport(report: JsonRepresentable, filePath: PathLike, **context: Any) -> Path:
    data = report.toJson()
    data.update(context)
    return writeJson(data, filePath)


def fieldToJson(field: Field) -> Dict[str, Any]:
    return {
        'grid': {'L': field.grid.halfLength, 'n': field.grid.n},
        'values': [float(v) for v in field.values],
    }


def fieldFromJson(data: Dict[str, Any], meanFree: bool = True) -> Field:
    grid = makeGrid(data['grid']['L'], data['grid']['n'])
    return Field(grid, np.asarray(data['values'], dtype=np.float64), meanFree)


def writeFieldCsv(field: Field, filePath: PathLike) -> Path:
    return writeCsv(FIELD_SCHEMA, zip(field.grid.nodes, field.values), filePath)


def profileToJson(profile: WaveProfile) -> Dict[str, Any]:
    return {
        'family': profile.family.value,
        'p': profile.p,
        'lambda': profile.lam,
        'omega': profile.omega,
        'el_residual': profile.elResidual,
        'iterations': profile.iterations,
        'm_value': profile.reportedEnergy,
        'grid': {'L': profile.grid.halfLength, 'n': profile.grid.n},
        'phi': [float(v) for v in profile.phi.values],
    }


def profileFromJson(data: Dict[str, Any]) -> WaveProfile:
    phi = fieldFromJson({'grid': data['grid'], 'values': data['phi']})

    return WaveProfile(
        family=ModelFamily.fromName(data['family']),
        p=float(data['p']),
        lam=float(data['lambda']),
        omega=float(data['omega']),
        phi=phi,
        elResidual=float(data['el_residual']),
        iterations=int(data.get('iterations', 0)),
        mValue=float(data['m_value']) if data.get('m_value') is not None else None,
    )


def writeProfile(profile: WaveProfile, outDir: PathLike) -> Path:
    """Write profile_<label>.json and profile_<label>.csv; returns the JSON path."""
    directory = processPath(outDir)
    stem = f'profile_{profile.label}'

    rows = zip(profile.grid.nodes, profile.phi.values, profile.derivative.values, profile.antiderivative.values)
    writeCsv(PROFILE_SCHEMA, rows, directory / f'{stem}.csv')

    return writeJson(profileToJson(profile), directory / f'{stem}.json')


def loadProfile(filePath: PathLike) -> WaveProfile:
    return profileFromJson(readJson(filePath))


def writeCostCurve(curve: CostCurve, outDir: PathLike, profileFiles: Sequence[Path] = ()) -> Path:
    """Write curve.csv and curve_manifest.json; the manifest lists profile files and failed lambdas."""
    directory = processPath(outDir)

    rows = (
        (lam, m, profile.omega, profile.elResidual)
        for lam, m, profile in zip(curve.lambdas, curve.values, curve.profiles)
    )
    csvPath = writeCsv(CURVE_SCHEMA, rows, directory / 'curve.csv')

    manifest = {
        'family': curve.family.value,
        'p': curve.p,
        'curve': csvPath.name,
        'profiles': [path.name for path in profileFiles],
        'failed': {f'{lam:g}': message for lam, message in sorted(curve.failures.items())},
        'partial': curve.partial,
        'omega_range': None if curve.omegaRange is None else list(curve.omegaRange),
    }

    return writeJson(manifest, directory / 'curve_manifest.json')


def loadCostCurveCsv(filePath: PathLike, family: Optional[ModelFamily] = None, p: Optional[float] = None) -> CostCurve:
    """
    Read a curve CSV back. family and p default to the values recorded in a sibling curve_manifest.json.

    :param filePath: path of the curve CSV
    :type filePath: PathLike
    :param family: the model family, required when no manifest is present
    :type family: Optional[ModelFamily]
    :param p: the exponent, required when no manifest is present
    :type p: Optional[float]
    :return: a curve without profiles
    :rtype: CostCurve
    """
    path = processPath(filePath)
    manifestPath = path.parent / 'curve_manifest.json'

    if family is None or p is None:
        if not manifestPath.exists():
            raise IncompatibleArtifactError(f'{path} has no manifest; family and p must be given')

        manifest = readJson(manifestPath)
        family = ModelFamily.fromName(manifest['family']) if family is None else family
        p = float(manifest['p']) if p is None else p

    rows = readCsv(CURVE_SCHEMA, path)

    return CostCurve(
        family, p,
        tuple(row['lambda'] for row in rows),
        tuple(row['m_value'] for row in rows),
    )


def writeSymmetricEigenvalues(eigenvalues: FloatArray, filePath: PathLike) -> Path:
    return writeCsv(EIGEN_SYMMETRIC_SCHEMA, ((value,) for value in eigenvalues), filePath)


def writeFullEigenvalues(eigenvalues: ComplexArray, filePath: PathLike) -> Path:
    ordered = sorted(eigenvalues, key=lambda z: (-z.real, z.imag))
    return writeCsv(EIGEN_FULL_SCHEMA, ((z.real, z.imag) for z in ordered), filePath)


def writeTrace(trace: EvolutionTrace, filePath: PathLike) -> Path:
    distance: Sequence[Optional[float]]

    if trace.orbitalDistance is None:
        distance = [None] * len(trace.times)
    else:
        distance = [optionalFloat(d) for d in trace.orbitalDistance]

    return writeCsv(TRACE_SCHEMA, zip(trace.times, trace.mass, trace.energy, distance), filePath)


def writeVerificationTable(rows: Sequence[VerificationRow], filePath: PathLike) -> Path:
    return writeCsv(VERIFICATION_SCHEMA, (list(row.toJson().values()) for row in rows), filePath)
