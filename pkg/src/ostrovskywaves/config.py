import json
import logging
import os
from functools import lru_cache
from pathlib import Path, PurePath
from typing import Any, Dict, List, Optional, Union, cast

from jsonschema import Draft202012Validator
from typing_extensions import TypedDict

from .exceptions import UsageError
from .solver import SolverOptions
from .stability import StabilityOptions


__all__ = [
    'PathLike',
    'GridConfig',
    'EvolveConfig',
    'RunConfig',
    'COMMANDS',
    'OUT_DIR_VARIABLE',
    'processPath',
    'configSchema',
    'validateConfig',
    'loadConfig',
    'applyOverrides',
    'defaultOutDir',
    'outDirFor',
    'lambdasFor',
    'gridFor',
    'nodesFor',
    'solverOptionsFor',
    'stabilityOptionsFor',
    'evolveSettingsFor',
]


logger = logging.getLogger(__name__)


COMMANDS = ('solve', 'sweep', 'stability', 'evolve', 'subadd', 'pohozaev', 'verify-all')
OUT_DIR_VARIABLE = 'OSTROVSKY_OUT_DIR'
DEFAULT_OUT_DIR = 'out'
DEFAULT_NODES = 1024

SCHEMA_PATH = Path(__file__).parent / 'schemas' / 'run_config.schema.json'


PathLike = Union[str, PurePath]


class GridConfig(TypedDict, total=False):
    L: Union[float, str]
    n: int


class EvolveConfig(TypedDict, total=False):
    T: float
    dt: float
    delta: float
    seed: int
    sampleEvery: int


# 'lambda' is a keyword, hence the functional form
RunConfig = TypedDict('RunConfig', {
    'command': str,
    'family': str,
    'p': float,
    'lambda': Union[float, List[float]],
    'grid': GridConfig,
    'solver': Dict[str, Any],
    'stability': Dict[str, Any],
    'evolve': EvolveConfig,
    'out_dir': str,
    'workers': int,
    'curve': str,
}, total=False)


DEFAULT_EVOLVE: EvolveConfig = {
    'T': 10.0,
    'dt': 1e-3,
    'delta': 1e-3,
}


def processPath(pathlike: PathLike) -> Path:
    return Path(pathlike)


@lru_cache(maxsize=None)
def configSchema() -> Dict[str, Any]:
    with SCHEMA_PATH.open('r', encoding='utf-8') as schemaFile:
        return cast(Dict[str, Any], json.load(schemaFile))


def validateConfig(config: Dict[str, Any]) -> RunConfig:
    validator = Draft202012Validator(configSchema())
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))

    if errors:
        details = '; '.join(
            f'{"/".join(str(part) for part in error.absolute_path) or "<root>"}: {error.message}' for error in errors
        )
        raise UsageError(f'Invalid run configuration: {details}')

    return cast(RunConfig, config)


def loadConfig(filePath: PathLike, validate: bool = True) -> RunConfig:
    path = processPath(filePath)

    try:
        with path.open('r', encoding='utf-8') as configFile:
            data = json.load(configFile)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f'Cannot read configuration {path}: {e}') from e

    if not isinstance(data, dict):
        raise UsageError(f'Configuration {path} must hold a JSON object')

    return validateConfig(data) if validate else cast(RunConfig, data)


def applyOverrides(config: Dict[str, Any], overrides: Dict[str, Any]) -> RunConfig:
    """
    Overlay command-line values on a configuration. Keys containing a dot address nested sections
    (``'grid.n'``, ``'evolve.seed'``); ``None`` values leave the configuration untouched.

    :param config: the configuration loaded from JSON, possibly empty
    :type config: Dict[str, Any]
    :param overrides: flag values keyed by configuration path
    :type overrides: Dict[str, Any]
    :return: a new, validated configuration
    :rtype: RunConfig
    """
    merged: Dict[str, Any] = json.loads(json.dumps(config))

    for key, value in overrides.items():
        if value is None:
            continue

        section, _, name = key.rpartition('.')

        if section:
            merged.setdefault(section, {})[name] = value
        else:
            merged[name] = value

    return validateConfig(merged)


def defaultOutDir() -> Path:
    return Path(os.environ.get(OUT_DIR_VARIABLE, DEFAULT_OUT_DIR))


def outDirFor(config: RunConfig) -> Path:
    directory = processPath(config['out_dir']) if 'out_dir' in config else defaultOutDir()

    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise UsageError(f'Cannot create output directory {directory}: {e}') from e

    if not os.access(directory, os.W_OK):
        raise UsageError(f'Output directory {directory} is not writable')

    return directory


def lambdasFor(config: RunConfig) -> List[float]:
    value = config.get('lambda')

    if value is None:
        raise UsageError(f'Command {config["command"]} needs lambda')

    if isinstance(value, list):
        return [float(lam) for lam in value]

    return [float(value)]


def gridFor(config: RunConfig) -> Optional[float]:
    """The configured half length, or None for the automatic box."""
    halfLength = config.get('grid', {}).get('L', 'auto')
    return None if halfLength == 'auto' else float(halfLength)


def nodesFor(config: RunConfig) -> int:
    return int(config.get('grid', {}).get('n', DEFAULT_NODES))


def solverOptionsFor(config: RunConfig) -> SolverOptions:
    options = SolverOptions(**config.get('solver', {}))

    if config.get('family') == 'abs' and 'p' in config:
        options.checkSeedAlpha(config['p'])

    return options


def stabilityOptionsFor(config: RunConfig) -> StabilityOptions:
    return StabilityOptions(**config.get('stability', {}))


def evolveSettingsFor(config: RunConfig) -> EvolveConfig:
    settings = cast(EvolveConfig, dict(DEFAULT_EVOLVE))
    settings.update(config.get('evolve', {}))

    if 'seed' not in settings:
        raise UsageError(f'Command {config["command"]} uses randomness and needs evolve.seed')

    logger.debug('Evolution settings: %s', settings)
    return settings
