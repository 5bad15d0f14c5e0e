import os
import tempfile
from contextlib import contextmanager
from functools import wraps
from pathlib import Path
from typing import Callable, Any, Optional, Iterator, TextIO

__all__ = [
    'acceptNone',
    'isPowerOfTwo',
    'relativeDifference',
    'atomicWrite',
]


def acceptNone(func: Callable[[Any], Any]) -> Callable[[Optional[Any]], Any]:
    @wraps(func)
    def wrapper(x: Optional[Any]) -> Any:
        if x is None:
            return None

        return func(x)
    return wrapper


def isPowerOfTwo(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def relativeDifference(a: float, b: float) -> float:
    """|a - b| / (|a| + |b|), zero when both vanish."""
    scale = abs(a) + abs(b)

    if scale == 0.0:
        return 0.0

    return abs(a - b) / scale


@contextmanager
def atomicWrite(path: Path, newline: Optional[str] = None) -> Iterator[TextIO]:
    """Write to a sibling temporary file and rename it over ``path`` on success."""
    path.parent.mkdir(parents=True, exist_ok=True)

    fd, tmpName = tempfile.mkstemp(prefix=f'.{path.name}.', suffix='.tmp', dir=str(path.parent))

    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline=newline) as handle:
            yield handle
            handle.flush()
            os.fsync(handle.fileno())

        os.replace(tmpName, path)
    except BaseException:
        if os.path.exists(tmpName):
            os.unlink(tmpName)
        raise
